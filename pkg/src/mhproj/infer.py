"""Tests and intervals for projection coefficients."""
from __future__ import annotations

import itertools
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from ._linalg import COND_LIMIT, sym_sqrt
from .errors import (
    EmptyInversionError,
    InvalidCovarianceError,
    InvalidRestrictionError,
    InvalidSpecError,
    SingularCovarianceError,
    UnstableBootstrapError,
)
from .estimate import (
    TWO_STAGE,
    EstimatorSpec,
    ProjectionFit,
    fit_var_ls,
    pope_bias_correct,
    rc_point_core,
)
from .model import impulse_responses
from .simulate import RngStream, SeriesPanel, var_recursion

BOOT_CHUNK = 100
MAX_FAIL_SHARE = 0.10


@dataclass(frozen=True)
class WaldResult:
    statistic: float
    df: int
    p_value: float
    restriction: str


@dataclass(frozen=True)
class CiResult:
    lower: float
    upper: float
    level: float
    method: str
    estimate: Optional[float] = None
    n_failed: int = 0

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise InvalidSpecError(f"interval bounds out of order: {self.lower} > {self.upper}")

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class LinearRestriction:
    """Null hypothesis ``R beta = r``."""

    R: np.ndarray
    r: np.ndarray
    description: str = ""

    def __post_init__(self):
        R = np.atleast_2d(np.asarray(self.R, dtype=float))
        r = np.asarray(self.r, dtype=float).reshape(-1)
        if r.shape[0] != R.shape[0]:
            raise InvalidRestrictionError("R and r disagree on the number of restrictions")
        if np.linalg.matrix_rank(R) < R.shape[0]:
            raise InvalidRestrictionError("restrictions must be linearly independent")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "r", r)

    def check(self, n: int):
        if self.R.shape[1] != n:
            raise InvalidRestrictionError(
                f"restriction has {self.R.shape[1]} columns, coefficient vector has {n}")

    @property
    def restricted(self) -> np.ndarray:
        """Coefficient positions that enter the restriction."""
        return np.flatnonzero(np.any(self.R != 0, axis=0))


def coefficient_restriction(n: int, index: int, value: float = 0.0) -> LinearRestriction:
    if not 0 <= index < n:
        raise InvalidRestrictionError(f"coefficient {index} outside 0..{n - 1}")
    R = np.zeros((1, n))
    R[0, index] = 1.0
    return LinearRestriction(R, [value], f"beta[{index}] = {value:g}")


def causality_restriction(p: int, k: int, cause: int, lags: Sequence[int]) -> LinearRestriction:
    """Zero coefficients on series ``cause`` at the given 1-based lags."""
    lags = sorted(set(int(l) for l in lags))
    if not lags or lags[0] < 1 or lags[-1] > p:
        raise InvalidRestrictionError(f"lags must be a non-empty subset of 1..{p}")
    if not 0 <= cause < k:
        raise InvalidRestrictionError(f"cause index {cause} outside 0..{k - 1}")
    R = np.zeros((len(lags), p * k))
    for i, lag in enumerate(lags):
        R[i, (lag - 1) * k + cause] = 1.0
    return LinearRestriction(R, np.zeros(len(lags)), f"series {cause} at lags {lags}")


# ------------------------------------------------------------------ Wald / z


def wald_statistic(beta, cov, t_bar, restriction: LinearRestriction):
    """Batched ``t_bar (R b - r)' (R V R')^{-1} (R b - r)``; nan where singular."""
    diff = beta @ restriction.R.T - restriction.r
    mid = restriction.R @ cov @ restriction.R.T
    with np.errstate(all="ignore"):
        sol = np.linalg.solve(mid, diff[..., None])[..., 0]
    return t_bar * np.sum(diff * sol, axis=-1)


def wald_test(fit: ProjectionFit, restriction: LinearRestriction) -> WaldResult:
    restriction.check(fit.beta_hat.shape[0])
    mid = restriction.R @ fit.cov_hat @ restriction.R.T
    cond = np.linalg.cond(mid)
    if not cond < COND_LIMIT:
        raise SingularCovarianceError(float(cond), restriction.description)
    w = float(wald_statistic(fit.beta_hat, fit.cov_hat, fit.t_bar, restriction))
    w = max(w, 0.0)
    df = restriction.R.shape[0]
    return WaldResult(w, df, float(stats.chi2.sf(w, df)), restriction.description)


def wald_causality(fit: ProjectionFit, cause: int, lags: Optional[Sequence[int]] = None) -> WaldResult:
    """Joint test that series ``cause`` has zero coefficients at ``lags`` (default all)."""
    lags = range(1, fit.p + 1) if lags is None else lags
    return wald_test(fit, causality_restriction(fit.p, fit.k, cause, lags))


def z_interval(fit: ProjectionFit, index: int, level: float = 0.95) -> CiResult:
    var = fit.cov_hat[index, index]
    if not var > 0:
        raise InvalidCovarianceError(f"variance of coefficient {index} is {var}")
    if not 0 <= level < 1:
        raise InvalidSpecError("level must lie in [0, 1)")
    est = float(fit.beta_hat[index])
    half = float(stats.norm.ppf(0.5 + level / 2) * np.sqrt(var / fit.t_bar))
    return CiResult(est - half, est + half, level, "z", est)


# ----------------------------------------------------------------- bootstrap


def _as_matrix(w, n):
    w = np.atleast_2d(np.asarray(w, dtype=float))
    if w.shape[1] != n:
        raise InvalidSpecError(f"selection vectors must have length {n}")
    return w


@dataclass
class BootstrapDraws:
    """Studentised bootstrap pivots for ``m`` linear combinations."""

    pivots: np.ndarray  # (B_ok, m)
    estimate: np.ndarray  # (m,)
    se: np.ndarray  # (m,)
    center: np.ndarray  # (m,)
    n_failed: int
    n_total: int


def _boot_chunk(ids, rng, resid, blocks_src, phi, c, spec, W, center, T):
    p = spec.p
    n_res = resid.shape[0]
    eps = np.empty((len(ids), n_res))
    starts = np.empty(len(ids), dtype=int)
    for i, b in enumerate(ids):
        sub = rng.child(b)
        eps[i] = sub.standard_normal(n_res)
        starts[i] = sub.integers(0, T - p + 1)
    u_star = eps[..., None] * resid
    init = np.stack([blocks_src[s:s + p] for s in starts])
    path = var_recursion(phi, c, u_star, initial=init)
    y_star = np.concatenate([init, path], axis=-2)
    beta, cov, ok = spec.fit_batch(y_star)
    est = beta @ W.T
    var = np.einsum("mi,bij,mj->bm", W, cov, W)
    t_bar = T - spec.h - p + 1
    with np.errstate(all="ignore"):
        piv = (est - center) / np.sqrt(var / t_bar)
    ok = ok & np.all(np.isfinite(piv), axis=-1) & np.all(var > 0, axis=-1)
    return piv, ok


def bootstrap_pivots(panel, spec: EstimatorSpec, w, B: int, rng: RngStream,
                     bias_correct: bool = True, center: str = "rc", threads: int = 1) -> BootstrapDraws:
    """Wild-bootstrap percentile-t pivots for the two-stage (or other) estimator.

    The bootstrap world is the LS VAR (bias-corrected by default). Each draw
    multiplies the VAR residuals by independent N(0, 1) scalars, starts from a
    randomly placed block of ``p`` observed rows and re-estimates. Pivots are
    centred at the recursive VAR value implied by the bootstrap-world
    coefficients (``center="rc"``) or at the original estimate (``"estimate"``).
    Draw ``b`` uses the substream ``rng.child(b)``, so results do not depend on
    ``threads``.
    """
    if B < 100:
        raise InvalidSpecError("bootstrap needs B >= 100")
    y = panel.data if isinstance(panel, SeriesPanel) else np.asarray(panel, dtype=float)
    T, k = y.shape
    fit0 = spec.fit(y)
    W = _as_matrix(w, fit0.beta_hat.shape[0])
    est = W @ fit0.beta_hat
    se = np.sqrt(np.einsum("mi,ij,mj->m", W, fit0.cov_hat, W) / fit0.t_bar)
    var = fit_var_ls(y, spec.p, spec.intercept)
    if bias_correct:
        var = pope_bias_correct(var)
    params = var.params_hat
    if center == "rc":
        ctr = W @ rc_point_core(params.phi, spec.h, spec.target_row)
    elif center == "estimate":
        ctr = est.copy()
    else:
        raise InvalidSpecError(f"unknown pivot centre {center!r}")
    resid = var.residuals
    if not np.any(resid):
        return BootstrapDraws(np.zeros((0, W.shape[0])), est, np.zeros_like(est), ctr, 0, B)
    chunks = [range(s, min(s + BOOT_CHUNK, B)) for s in range(0, B, BOOT_CHUNK)]
    args = (rng, resid, y, params.phi, params.c, spec, W, ctr, T)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda ids: _boot_chunk(ids, *args), chunks))
    else:
        parts = [_boot_chunk(ids, *args) for ids in chunks]
    piv = np.concatenate([p for p, _ in parts])
    ok = np.concatenate([o for _, o in parts])
    n_failed = int(B - ok.sum())
    if n_failed > MAX_FAIL_SHARE * B:
        raise UnstableBootstrapError(n_failed, B)
    return BootstrapDraws(piv[ok], est, se, ctr, n_failed, B)


def percentile_t_interval(estimate, se, pivots, level):
    """``[est - q_hi se, est - q_lo se]`` with type-7 pivot quantiles."""
    alpha = 1.0 - level
    q_lo, q_hi = np.quantile(np.sort(pivots), [alpha / 2, 1 - alpha / 2])
    return estimate - q_hi * se, estimate - q_lo * se


def bootstrap_ti(panel, spec: EstimatorSpec, w, B: int = 2000, level: float = 0.95,
                 rng: Optional[RngStream] = None, bias_correct: bool = True,
                 center: str = "rc", threads: int = 1) -> CiResult:
    """Equal-tailed wild-bootstrap percentile-t interval for ``w' beta_h``."""
    rng = RngStream(0) if rng is None else rng
    draws = bootstrap_pivots(panel, spec, w, B, rng, bias_correct, center, threads)
    est, se = float(draws.estimate[0]), float(draws.se[0])
    if draws.pivots.shape[0] == 0 or se == 0:
        return CiResult(est, est, level, "bootstrap_t", est, draws.n_failed)
    lo, hi = percentile_t_interval(est, se, draws.pivots[:, 0], level)
    return CiResult(float(lo), float(hi), level, "bootstrap_t", est, draws.n_failed)


def supt_critical_value(pivots, level: float) -> float:
    piv = np.atleast_2d(np.asarray(pivots, dtype=float))
    if piv.shape[0] < 100:
        raise InvalidSpecError("sup-t band needs at least 100 draws")
    return float(np.quantile(np.sort(np.abs(piv).max(axis=1)), level))


def supt_band(pivots, estimates, ses, level: float = 0.95) -> list[CiResult]:
    """Simultaneous band ``est_j +/- c se_j`` with c the level-quantile of max |pivot|."""
    piv = np.asarray(pivots, dtype=float)
    if piv.ndim == 1:
        piv = piv[:, None]
    est = np.atleast_1d(np.asarray(estimates, dtype=float))
    se = np.atleast_1d(np.asarray(ses, dtype=float))
    if not (piv.shape[1] == est.shape[0] == se.shape[0]) or est.shape[0] < 1:
        raise InvalidSpecError("pivots, estimates and standard errors disagree in length")
    c = supt_critical_value(piv, level)
    return [CiResult(float(e - c * s), float(e + c * s), level, "supt", float(e))
            for e, s in zip(est, se)]


# -------------------------------------------------------- Monte Carlo tests


def mc_pvalue(observed: float, simulated) -> float:
    """``(1 + #{W_i >= W_0}) / (N + 1)``; ties count as exceedances."""
    sims = np.asarray(simulated, dtype=float).reshape(-1)
    if sims.shape[0] < 1:
        raise InvalidSpecError("need at least one simulated statistic")
    return (1.0 + float(np.sum(sims >= observed))) / (sims.shape[0] + 1.0)


@dataclass
class McTestResult:
    p_value: float
    statistic: float
    draws: np.ndarray
    point: Optional[np.ndarray] = None
    n_failed: int = 0
    grid_pvalues: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass
class _McWorld:
    """Everything a simulated test needs from the observed sample."""

    spec: EstimatorSpec
    y: np.ndarray
    fit: ProjectionFit
    phi: np.ndarray
    c: np.ndarray
    sigma_root: np.ndarray
    psi_row: np.ndarray  # (h, k)
    intercept_hat: float
    rng: RngStream
    N: int

    @classmethod
    def build(cls, panel, spec: EstimatorSpec, N: int, rng: RngStream):
        if spec.method != TWO_STAGE:
            raise InvalidSpecError("Monte Carlo tests are defined for the two-stage estimator")
        if N < 19:
            raise InvalidSpecError("Monte Carlo tests need N >= 19")
        y = panel.data if isinstance(panel, SeriesPanel) else np.asarray(panel, dtype=float)
        fit = spec.fit(y)
        var = fit_var_ls(y, spec.p, spec.intercept)
        prm = var.params_hat
        psi = impulse_responses(prm, spec.h)[:, spec.target_row, :]
        # intercept of the projection, recovered from the observed sample
        T = y.shape[0]
        x = np.concatenate([y[spec.p - 1 - j:T - spec.h - j] for j in range(spec.p)], axis=1)
        c_hat = float(np.mean(y[spec.p - 1 + spec.h:, spec.target_row] - x @ fit.beta_hat)) \
            if spec.intercept else 0.0
        return cls(spec, y, fit, prm.phi, prm.c, sym_sqrt(prm.sigma_u), psi, c_hat, rng, N)

    def simulate_stats(self, beta_null, restriction: LinearRestriction):
        """Wald draws for N samples generated under coefficients ``beta_null``."""
        spec, y = self.spec, self.y
        T, k = y.shape
        p, h = spec.p, spec.h
        eps = np.stack([self.rng.child(i).standard_normal((T, k)) for i in range(self.N)])
        u_star = eps @ self.sigma_root
        y_star = var_recursion(self.phi, self.c, u_star[:, p:], initial=y[:p])
        y_star = np.concatenate([np.broadcast_to(y[:p], (self.N, p, k)), y_star], axis=1)
        # e*_t = sum_i Psi_i u*_{t+h-i} for t = p..T-h, placed at date t+h
        n = T - h - p + 1
        e = np.zeros((self.N, n))
        for i in range(h):
            e += u_star[:, p - 1 + h - i:p - 1 + h - i + n, :] @ self.psi_row[i]
        x = np.concatenate([y_star[:, p - 1 - j:T - h - j] for j in range(p)], axis=2)
        outcome = np.zeros((self.N, T))
        outcome[:, p - 1 + h:] = x @ beta_null + self.intercept_hat + e
        beta, cov, ok = spec.fit_batch(y_star, outcome=outcome)
        w = wald_statistic(beta, cov, self.fit.t_bar, restriction)
        ok = ok & np.isfinite(w)
        return w, ok


def _restricted_estimate(fit: ProjectionFit, restriction: LinearRestriction):
    """Covariance-weighted minimum-distance estimate satisfying the null."""
    R, r = restriction.R, restriction.r
    V = fit.cov_hat
    gap = R @ fit.beta_hat - r
    return fit.beta_hat - V @ R.T @ np.linalg.solve(R @ V @ R.T, gap)


def _lmc_at(world: _McWorld, beta_null, restriction, w0):
    w, ok = world.simulate_stats(beta_null, restriction)
    # failed draws count as exceedances so the p-value stays conservative
    w = np.where(ok, w, np.inf)
    return mc_pvalue(w0, w), w, int((~ok).sum())


def lmc_test(panel, restriction: LinearRestriction, spec: EstimatorSpec, N: int = 99,
             rng: Optional[RngStream] = None) -> McTestResult:
    """Local Monte Carlo test of ``R beta_h = r`` for the two-stage estimator.

    Samples are generated from the fitted VAR with Gaussian innovations; the
    projected series is rebuilt from the null-restricted coefficients and an
    MA(h-1) error formed from the same innovations.
    """
    rng = RngStream(0) if rng is None else rng
    world = _McWorld.build(panel, spec, N, rng)
    restriction.check(world.fit.beta_hat.shape[0])
    w0 = wald_test(world.fit, restriction).statistic
    beta_null = _restricted_estimate(world.fit, restriction)
    pv, draws, nf = _lmc_at(world, beta_null, restriction, w0)
    return McTestResult(pv, w0, draws, beta_null, nf)


def mmc_grid(center, se, free, width: float = 2.0, resolution: int = 3):
    """Full-factorial grid over ``center[free] +/- width * se[free]``.

    The centre itself is always included.
    """
    if resolution < 1:
        raise InvalidSpecError("grid resolution must be >= 1")
    if not np.all(np.isfinite(se[free])) or not np.isfinite(width):
        raise InvalidSpecError("nuisance box must be finite")
    axes = [np.linspace(center[j] - width * se[j], center[j] + width * se[j], resolution)
            if resolution > 1 else np.array([center[j]]) for j in free]
    pts = [center.copy()]
    for combo in itertools.product(*axes):
        pt = center.copy()
        pt[free] = combo
        pts.append(pt)
    return np.array(pts)


def mmc_test(panel, restriction: LinearRestriction, spec: EstimatorSpec, N: int = 99,
             rng: Optional[RngStream] = None, width: float = 2.0, resolution: int = 3,
             grid=None) -> McTestResult:
    """Maximised Monte Carlo test over a box of nuisance coefficients.

    Nuisance coefficients are those the restriction does not involve; they
    range over ``+/- width`` standard errors around the restricted estimate
    unless an explicit ``grid`` of full coefficient vectors is given. Every
    grid point reuses the same random streams, so the maximum dominates the
    local test at the centre.
    """
    rng = RngStream(0) if rng is None else rng
    world = _McWorld.build(panel, spec, N, rng)
    n = world.fit.beta_hat.shape[0]
    restriction.check(n)
    w0 = wald_test(world.fit, restriction).statistic
    center = _restricted_estimate(world.fit, restriction)
    if grid is None:
        free = np.setdiff1d(np.arange(n), restriction.restricted)
        grid = mmc_grid(center, world.fit.se, free, width, resolution)
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.shape[0] == 0:
        raise InvalidSpecError("MMC grid is empty")
    if not np.allclose(grid @ restriction.R.T, restriction.r, atol=1e-8):
        raise InvalidRestrictionError("every grid point must satisfy the null")
    pvals, best, nf_tot = [], None, 0
    for pt in grid:
        pv, draws, nf = _lmc_at(world, pt, restriction, w0)
        pvals.append(pv)
        nf_tot += nf
        if best is None or pv > best[0]:
            best = (pv, draws, pt)
    return McTestResult(best[0], w0, best[1], best[2], nf_tot, np.array(pvals))


def ci_by_test_inversion(panel, index: int, grid, spec: EstimatorSpec, test: str = "lmc",
                         level: float = 0.95, N: int = 99, rng: Optional[RngStream] = None,
                         **mmc_kw) -> CiResult:
    """Confidence interval as the range of grid values not rejected at ``1 - level``.

    A value is rejected when its Monte Carlo p-value is at most ``1 - level``.

    ``grid`` is an array of candidate values, or ``(lower, upper, step)``.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim == 1 and grid.shape[0] == 3 and grid[2] > 0 and grid[1] > grid[0] \
            and (grid[1] - grid[0]) / grid[2] >= 2:
        grid = np.arange(grid[0], grid[1] + grid[2] / 2, grid[2])
    grid = np.sort(np.atleast_1d(grid))
    rng = RngStream(0) if rng is None else rng
    y = panel.data if isinstance(panel, SeriesPanel) else np.asarray(panel, dtype=float)
    n = spec.p * y.shape[1]
    accepted = []
    for g in grid:
        rest = coefficient_restriction(n, index, float(g))
        if test == "lmc":
            res = lmc_test(y, rest, spec, N, rng)
        elif test == "mmc":
            res = mmc_test(y, rest, spec, N, rng, **mmc_kw)
        else:
            raise InvalidSpecError(f"unknown test {test!r}")
        # an MC test at level alpha rejects when p <= alpha
        accepted.append(res.p_value > 1.0 - level + 1e-12)
    accepted = np.array(accepted)
    if not accepted.any():
        raise EmptyInversionError("no grid value was accepted; widen the grid bounds")
    idx = np.flatnonzero(accepted)
    if idx[-1] - idx[0] + 1 != idx.shape[0]:
        warnings.warn("accepted grid values are not contiguous", RuntimeWarning, stacklevel=2)
    est = float(spec.fit(y).beta_hat[index])
    return CiResult(float(grid[idx[0]]), float(grid[idx[-1]]), level, f"{test}_inversion", est)
