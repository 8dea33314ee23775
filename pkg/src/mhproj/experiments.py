"""Monte Carlo harness and the asymptotic efficiency grid."""
from __future__ import annotations

import csv
import io
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
import yaml
from scipy import stats
from scipy.signal import lfilter

from .errors import ConfigError, InvalidSpecError, MhprojError
from .estimate import EstimatorSpec
from .infer import bootstrap_pivots, percentile_t_interval
from .model import (
    DgpSpec,
    VarParams,
    dgp_from_roots,
    gir_recursion,
    named_dgp,
    omega_beta_closed,
    omega_ls_closed,
)
from .simulate import RngStream, draw_innovations, var_recursion

MC_CHUNK = 50
MAX_FAIL_SHARE = 0.05

_METHOD_RE = re.compile(r"^(rc-var|ls-proj|2s\(([012])\))(_b)?$", re.IGNORECASE)
_TARGET_RE = re.compile(r"^phi_(\d)(\d)_(\d+)$")


@dataclass(frozen=True)
class MethodSpec:
    """A Monte Carlo method: estimator family plus interval type."""

    name: str
    family: str  # "rc", "ls" or "2s"
    delta: int = 0
    bootstrap: bool = False

    @classmethod
    def parse(cls, text: str) -> "MethodSpec":
        m = _METHOD_RE.match(text.strip())
        if not m:
            raise ConfigError(f"unknown method {text!r}; use RC-VAR, LS-Proj, 2S(d) or 2S(d)_b")
        head = m.group(1).lower()
        family = {"rc-var": "rc", "ls-proj": "ls"}.get(head, "2s")
        boot = m.group(3) is not None
        if boot and family != "2s":
            raise ConfigError("bootstrap intervals are available for two-stage methods only")
        delta = int(m.group(2)) if m.group(2) else 0
        label = {"rc": "RC-VAR", "ls": "LS-Proj"}.get(family, f"2S({delta})") + ("_b" if boot else "")
        return cls(label, family, delta, boot)


@dataclass(frozen=True)
class Target:
    """Coefficient ``Phi_lag^{(h)}[row, col]`` (0-based row/col, 1-based lag)."""

    row: int
    col: int
    lag: int

    @classmethod
    def parse(cls, obj) -> "Target":
        if isinstance(obj, Target):
            return obj
        if isinstance(obj, dict):
            try:
                return cls(int(obj["row"]), int(obj["col"]), int(obj["lag"]))
            except KeyError as exc:
                raise ConfigError(f"target mapping needs row, col, lag: missing {exc}") from None
        m = _TARGET_RE.match(str(obj))
        if not m:
            raise ConfigError(f"target {obj!r} must look like phi_12_1 (row, column, lag; 1-based)")
        return cls(int(m.group(1)) - 1, int(m.group(2)) - 1, int(m.group(3)))

    @property
    def label(self) -> str:
        return f"phi_{self.row + 1}{self.col + 1}_{self.lag}"

    def index(self, k: int) -> int:
        return (self.lag - 1) * k + self.col


@dataclass(frozen=True)
class McConfig:
    dgp: DgpSpec
    T: int
    replications: int
    horizons: tuple
    methods: tuple
    targets: tuple
    bootstrap_draws: int = 499
    level: float = 0.95
    master_seed: int = 42
    p: Optional[int] = None
    intercept: bool = True
    bandwidth: Optional[str] = None  # None (= h), "h+1" or an integer
    burn_in: int = 0
    bias_correct: bool = True  # bootstrap world
    workers: int = 1
    dgp_name: str = "custom"

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not self.horizons or min(self.horizons) < 1:
            raise ConfigError("horizons must be a non-empty list of integers >= 1")
        if not self.methods:
            raise ConfigError("at least one method is required")
        if not self.targets:
            raise ConfigError("at least one target is required")
        if not 0 < self.level < 1:
            raise ConfigError("level must lie in (0, 1)")
        if self.T <= max(self.horizons) + self.lag_order:
            raise ConfigError(f"T={self.T} must exceed max horizon + p")
        if any(m.bootstrap for m in self.methods) and self.bootstrap_draws < 100:
            raise ConfigError("bootstrap_draws must be >= 100")
        k = self.dgp.roots[0].shape[0]
        for t in self.targets:
            if not (0 <= t.row < k and 0 <= t.col < k and 1 <= t.lag <= self.lag_order):
                raise ConfigError(f"target {t.label} outside the model dimensions")

    @property
    def lag_order(self) -> int:
        return self.p if self.p is not None else len(self.dgp.roots)

    def bandwidth_for(self, h: int) -> int:
        if self.bandwidth is None or self.bandwidth == "h":
            return h
        if self.bandwidth == "h+1":
            return h + 1
        return int(self.bandwidth)


_CONFIG_KEYS = {"dgp", "T", "replications", "bootstrap_draws", "horizons", "methods", "targets",
                "level", "master_seed", "p", "intercept", "bandwidth", "burn_in", "bias_correct",
                "workers"}
_DGP_KEYS = {"name", "roots", "sigma_u", "rotation", "innovation", "df"}


def _parse_dgp(obj):
    if isinstance(obj, str):
        return named_dgp(obj), obj
    if not isinstance(obj, dict):
        raise ConfigError("dgp must be a name or a mapping")
    unknown = set(obj) - _DGP_KEYS
    if unknown:
        raise ConfigError(f"unknown dgp keys: {sorted(unknown)}")
    if "name" in obj:
        base = named_dgp(obj["name"], obj.get("sigma_u", [[1.0, 0.5], [0.5, 1.0]]))
        roots = base.roots
        name = obj["name"]
    else:
        if "roots" not in obj or "sigma_u" not in obj:
            raise ConfigError("a custom dgp needs roots and sigma_u")
        roots, name = obj["roots"], "custom"
    spec = DgpSpec(roots=roots, sigma_u=obj.get("sigma_u", [[1.0, 0.5], [0.5, 1.0]]),
                   rotation=obj.get("rotation"), innovation=obj.get("innovation", "gaussian"),
                   df=obj.get("df"))
    return spec, name


def config_from_dict(d: dict, **overrides) -> McConfig:
    d = {**d, **{k: v for k, v in overrides.items() if v is not None}}
    unknown = set(d) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    for key in ("dgp", "T", "replications", "horizons", "methods", "targets"):
        if key not in d:
            raise ConfigError(f"missing required key {key!r}")
    dgp, name = _parse_dgp(d["dgp"])
    try:
        return McConfig(
            dgp=dgp, dgp_name=name, T=int(d["T"]), replications=int(d["replications"]),
            horizons=tuple(int(h) for h in d["horizons"]),
            methods=tuple(MethodSpec.parse(m) for m in d["methods"]),
            targets=tuple(Target.parse(t) for t in d["targets"]),
            bootstrap_draws=int(d.get("bootstrap_draws", 499)), level=float(d.get("level", 0.95)),
            master_seed=int(d.get("master_seed", 42)), p=d.get("p"),
            intercept=bool(d.get("intercept", True)), bandwidth=d.get("bandwidth"),
            burn_in=int(d.get("burn_in", 0)), bias_correct=bool(d.get("bias_correct", True)),
            workers=int(d.get("workers", 1)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, MhprojError):
            raise
        raise ConfigError(str(exc)) from None


def load_config(path, **overrides) -> McConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            d = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
    if not isinstance(d, dict):
        raise ConfigError("configuration must be a mapping")
    return config_from_dict(d, **overrides)


@dataclass(frozen=True)
class McCell:
    method: str
    target: str
    horizon: int
    true_value: float
    bias: float
    rmse: float
    empirical_size: float
    coverage: float
    avg_ci_width: float
    n_failed: int
    n_reps: int
    flagged: bool = False


@dataclass
class McSummary:
    cells: list
    config: Optional[McConfig] = field(default=None, repr=False)

    def cell(self, method: str, target: str, horizon: int) -> McCell:
        for c in self.cells:
            if c.method == method and c.target == target and c.horizon == horizon:
                return c
        raise KeyError((method, target, horizon))

    def to_rows(self) -> list[dict]:
        return [asdict(c) for c in self.cells]


def true_values(params: VarParams, targets, horizons) -> dict:
    girs = gir_recursion(params, max(horizons))
    return {(t.label, h): float(girs[h - 1].coeffs[t.lag - 1, t.row, t.col])
            for t in targets for h in horizons}


def _simulate_chunk(cfg: McConfig, params: VarParams, reps):
    k = params.k
    n = cfg.T + cfg.burn_in
    u = np.stack([draw_innovations(params.sigma_u, (n, k), RngStream(cfg.master_seed, (0, r)),
                                   cfg.dgp.innovation, cfg.dgp.df) for r in reps])
    return var_recursion(params.phi, params.intercept, u)[:, cfg.burn_in:]


def _run_chunk(cfg: McConfig, reps):
    """Point estimates and interval bounds for one block of replications."""
    params = dgp_from_roots(cfg.dgp)
    ys = _simulate_chunk(cfg, params, reps)
    k, p = params.k, cfg.lag_order
    z = stats.norm.ppf(0.5 + cfg.level / 2)
    out = {}
    for mi, m in enumerate(cfg.methods):
        for h in cfg.horizons:
            for row in sorted({t.row for t in cfg.targets}):
                idx = [t.index(k) for t in cfg.targets if t.row == row]
                spec = EstimatorSpec(m.family, p, h, m.delta, row, cfg.intercept, cfg.bandwidth_for(h))
                if m.bootstrap:
                    res = _bootstrap_block(cfg, spec, ys, reps, idx, (mi, h, row))
                else:
                    beta, cov, ok = spec.fit_batch(ys)
                    t_bar = cfg.T - h - p + 1
                    est = beta[:, idx]
                    se = np.sqrt(np.clip(cov[:, idx, idx], 0, None) / t_bar)
                    res = (est, est - z * se, est + z * se, ok & np.all(se > 0, axis=1))
                out[(m.name, row, h)] = res
    return out


def _bootstrap_block(cfg, spec, ys, reps, idx, key):
    n, m = len(reps), len(idx)
    W = np.eye(spec.p * ys.shape[-1])[idx]
    est, lo, hi = (np.full((n, m), np.nan) for _ in range(3))
    ok = np.zeros(n, dtype=bool)
    for i, r in enumerate(reps):
        rng = RngStream(cfg.master_seed, (1, r) + key)
        try:
            draws = bootstrap_pivots(ys[i], spec, W, cfg.bootstrap_draws, rng, cfg.bias_correct)
        except (MhprojError, np.linalg.LinAlgError):
            continue
        if draws.pivots.shape[0] == 0:
            continue
        est[i] = draws.estimate
        for j in range(m):
            lo[i, j], hi[i, j] = percentile_t_interval(draws.estimate[j], draws.se[j],
                                                       draws.pivots[:, j], cfg.level)
        ok[i] = True
    return est, lo, hi, ok


def _chunks(n, size=MC_CHUNK):
    return [list(range(s, min(s + size, n))) for s in range(0, n, size)]


def run_mc(cfg: McConfig, workers: Optional[int] = None) -> McSummary:
    """Run every configured method on every replication and aggregate the panels.

    Replication ``r`` draws its innovations from stream ``(0, r)``; bootstrap
    draws use streams keyed by replication, method, horizon and row. Work is
    split into fixed blocks of replications, so the output does not depend on
    the number of workers.
    """
    workers = cfg.workers if workers is None else workers
    chunks = _chunks(cfg.replications)
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_run_chunk, [cfg] * len(chunks), chunks))
    else:
        parts = [_run_chunk(cfg, c) for c in chunks]
    params = dgp_from_roots(cfg.dgp)
    truth = true_values(params, cfg.targets, cfg.horizons)
    cells = []
    for m in cfg.methods:
        for t in cfg.targets:
            rows = [tt for tt in cfg.targets if tt.row == t.row]
            j = rows.index(t)
            for h in cfg.horizons:
                est, lo, hi, ok = (np.concatenate([part[(m.name, t.row, h)][i] for part in parts])
                                   for i in range(4))
                cells.append(_summarise(m.name, t.label, h, truth[(t.label, h)],
                                        est[:, j], lo[:, j], hi[:, j], ok))
    return McSummary(cells, cfg)


def _summarise(method, target, h, true, est, lo, hi, ok):
    n = ok.shape[0]
    n_failed = int(n - ok.sum())
    if ok.sum() == 0:
        nan = float("nan")
        return McCell(method, target, h, true, nan, nan, nan, nan, nan, n_failed, n, True)
    e, l, u = est[ok], lo[ok], hi[ok]
    err = e - true
    covered = (l <= true) & (true <= u)
    return McCell(method, target, h, true, float(err.mean()), float(np.sqrt(np.mean(err ** 2))),
                  float(1.0 - covered.mean()), float(covered.mean()), float(np.mean(u - l)),
                  n_failed, n, n_failed > MAX_FAIL_SHARE * n)


PANELS = (("Bias", "bias"), ("RMSE", "rmse"), ("Size", "empirical_size"),
          ("Coverage", "coverage"), ("Width", "avg_ci_width"))


def compare_methods_report(summary: McSummary):
    """Tables shaped methods x horizons, one block per target and panel.

    Returns ``(csv_text, aligned_text)``; the CSV keeps full precision and the
    text rounds to three decimals.
    """
    if not summary.cells:
        raise InvalidSpecError("empty Monte Carlo summary")
    if all(c.n_failed == c.n_reps for c in summary.cells):
        ledger = "; ".join(f"{c.method}/{c.target}/h={c.horizon}: {c.n_failed} failed"
                           for c in summary.cells)
        raise InvalidSpecError(f"every replication failed: {ledger}")
    methods = list(dict.fromkeys(c.method for c in summary.cells))
    targets = list(dict.fromkeys(c.target for c in summary.cells))
    horizons = sorted({c.horizon for c in summary.cells})
    lookup = {(c.method, c.target, c.horizon): c for c in summary.cells}
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["target", "panel", "method"] + [f"h={h}" for h in horizons])
    lines = []
    width = max(len(m) for m in methods + ["value"]) + 2
    head = "".ljust(width) + "".join(f"h={h}".rjust(10) for h in horizons)
    for t in targets:
        lines.append(f"== {t} ==")
        lines.append(head)
        vals = [lookup[(methods[0], t, h)].true_value for h in horizons]
        writer.writerow([t, "Value", ""] + [repr(v) for v in vals])
        lines.append("value".ljust(width) + "".join(_fmt(v) for v in vals))
        for title, attr in PANELS:
            lines.append(f"-- {title}")
            for m in methods:
                row = [getattr(lookup[(m, t, h)], attr) if (m, t, h) in lookup else float("nan")
                       for h in horizons]
                writer.writerow([t, title, m] + [repr(float(v)) for v in row])
                lines.append(m.ljust(width) + "".join(_fmt(v) for v in row))
        flagged = [c for c in summary.cells if c.target == t and c.flagged]
        for c in flagged:
            lines.append(f"! {c.method} h={c.horizon}: {c.n_failed}/{c.n_reps} replications failed")
    return buf.getvalue(), "\n".join(lines) + "\n"


def _fmt(v):
    v = float(v)
    if not np.isfinite(v):
        return "nan".rjust(10)
    if v != 0 and abs(v) < 1e-3:
        return f"{v:.2E}".rjust(10)
    return f"{v:.3f}".rjust(10)


# ------------------------------------------------------------ efficiency grid


@dataclass(frozen=True)
class EfficiencyCell:
    rho1: float
    rho2: float
    h: int
    coef: int  # 1 or 2: which lag coefficient
    sd_ls: float
    sd_2s: float
    ratio: float
    category: str
    skipped: Optional[str] = None


def efficiency_category(ratio: float) -> str:
    if ratio >= 1.0:
        return "ls_better"
    if ratio > 0.9:
        return "2s_0_10"
    if ratio > 0.7:
        return "2s_10_30"
    return "2s_30plus"


def ar2_params(rho1: float, rho2: float, sigma2: float = 1.0) -> VarParams:
    """Scalar AR(2) with roots rho1, rho2."""
    return VarParams(np.array([[[rho1 + rho2]], [[-rho1 * rho2]]]), [[sigma2]])


def _grid_values(spec):
    if isinstance(spec, tuple) and len(spec) == 3:
        lo, hi, step = spec
        n = int(round((hi - lo) / step)) + 1
        return np.round(lo + step * np.arange(n), 10)
    return np.asarray(spec, dtype=float)


def efficiency_grid(rho2_values=(0.8, 0.5, 0.2, -0.5), rho1_grid=(0.01, 0.99, 0.01),
                    horizons=range(1, 37)) -> list[EfficiencyCell]:
    """Asymptotic sd of the LS and two-stage projection estimators for AR(2) designs.

    ``rho1_grid`` is ``(lower, upper, step)`` or an explicit sequence. Both
    lag coefficients are reported. Non-stationary designs are returned as
    skipped cells.
    """
    from .model import population_autocov

    cells = []
    horizons = list(horizons)
    for rho2 in rho2_values:
        for rho1 in _grid_values(rho1_grid):
            if max(abs(rho1), abs(rho2)) >= 1.0:
                for h in horizons:
                    for j in (1, 2):
                        cells.append(EfficiencyCell(float(rho1), float(rho2), h, j, np.nan, np.nan,
                                                    np.nan, "skipped", "explosive or unit root"))
                continue
            prm = ar2_params(rho1, rho2)
            gam = population_autocov(prm, max(horizons) + 2)
            for h in horizons:
                ls = np.diag(omega_ls_closed(prm, h, autocov=gam))
                two = np.diag(omega_beta_closed(prm, h))
                for j in (1, 2):
                    sd_ls, sd_2s = float(np.sqrt(ls[j - 1])), float(np.sqrt(two[j - 1]))
                    ratio = sd_2s / sd_ls
                    cells.append(EfficiencyCell(float(rho1), float(rho2), h, j, sd_ls, sd_2s,
                                                ratio, efficiency_category(ratio)))
    return cells


def efficiency_table(cells) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rho1", "rho2", "h", "coef", "sd_ls", "sd_2s", "ratio", "category", "skipped"])
    for c in cells:
        writer.writerow([repr(c.rho1), repr(c.rho2), c.h, c.coef, repr(c.sd_ls), repr(c.sd_2s),
                         repr(c.ratio), c.category, c.skipped or ""])
    return buf.getvalue()


def simulate_ar2_batch(rho1, rho2, T, reps, rng: RngStream):
    """``reps`` zero-start AR(2) paths of length T with unit-variance shocks."""
    e = rng.standard_normal((reps, T))
    return lfilter([1.0], [1.0, -(rho1 + rho2), rho1 * rho2], e, axis=1)[..., None]


def _ar2_projection_pair(y, h):
    """LS and two-stage projection estimates for zero-mean AR(2) paths.

    Works from 2x2 cross-product sums, which is far cheaper than the generic
    cores at large T. ``y`` has shape (reps, T).
    """
    dot = lambda a, b: np.einsum("ij,ij->i", a, b)
    # first-stage VAR(2) on rows 2..T-1
    yt, y1, y2 = y[:, 2:], y[:, 1:-1], y[:, :-2]
    A = np.stack([np.stack([dot(y1, y1), dot(y1, y2)], -1), np.stack([dot(y2, y1), dot(y2, y2)], -1)], 1)
    a = np.linalg.solve(A, np.stack([dot(y1, yt), dot(y2, yt)], -1)[..., None])[..., 0]
    u = np.zeros_like(y)
    u[:, 2:] = yt - a[:, :1] * y1 - a[:, 1:] * y2
    # projection rows 1..T-h-1 (0-based), regressors y_t, y_{t-1}
    n = y.shape[1] - h
    x0, x1, out = y[:, 1:n], y[:, :n - 1], y[:, 1 + h:]
    z0, z1 = u[:, 1:n], u[:, :n - 1]
    xx = np.stack([np.stack([dot(x0, x0), dot(x0, x1)], -1), np.stack([dot(x1, x0), dot(x1, x1)], -1)], 1)
    xy = np.stack([dot(x0, out), dot(x1, out)], -1)[..., None]
    zx = np.stack([np.stack([dot(z0, x0), dot(z0, x1)], -1), np.stack([dot(z1, x0), dot(z1, x1)], -1)], 1)
    zy = np.stack([dot(z0, out), dot(z1, out)], -1)[..., None]
    return np.linalg.solve(xx, xy)[..., 0], np.linalg.solve(zx, zy)[..., 0]


def efficiency_mc_check(rho1, rho2, h, T=100_000, reps=2000, seed=0, chunk=50):
    """Sampling sds of ``sqrt(T_bar) (beta_hat - beta)`` for LS and two-stage.

    Returns ``{"ls": (mc, closed), "2s": (mc, closed)}`` with arrays over both
    lag coefficients.
    """
    prm = ar2_params(rho1, rho2)
    truth = gir_recursion(prm, h)[-1].beta(0)
    t_bar = T - h - 2 + 1
    draws = {"ls": [], "2s": []}
    for i, block in enumerate(_chunks(reps, chunk)):
        y = simulate_ar2_batch(rho1, rho2, T, len(block), RngStream(seed, (2, i)))[..., 0]
        beta_ls, beta_2s = _ar2_projection_pair(y, h)
        draws["ls"].append(np.sqrt(t_bar) * (beta_ls - truth))
        draws["2s"].append(np.sqrt(t_bar) * (beta_2s - truth))
    closed = {"ls": np.sqrt(np.diag(omega_ls_closed(prm, h))),
              "2s": np.sqrt(np.diag(omega_beta_closed(prm, h)))}
    return {f: (np.concatenate(draws[f]).std(axis=0, ddof=1), closed[f]) for f in draws}
