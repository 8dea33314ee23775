"""Estimators for VAR and multi-horizon projection coefficients.

Four estimators share one sample convention. With 1-based time, the
horizon-h projection regresses ``y_{r,t+h}`` on ``x_t = (y_t', ..., y_{t-p+1}')'``
for ``t = p, ..., T-h``, so ``t_bar = T - h - p + 1``. Every ``cov_hat`` is an
asymptotic covariance: standard errors are ``sqrt(diag(cov_hat) / t_bar)``.

The private ``*_core`` functions accept arrays with arbitrary leading batch
axes; the Monte Carlo and bootstrap code feed them stacks of samples.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ._linalg import COND_LIMIT, batched_cond, batched_sandwich, batched_sym
from .errors import (
    CollinearityError,
    IndexContractError,
    InsufficientDataError,
    InvalidBandwidthError,
    InvalidHorizonError,
    InvalidSpecError,
    NumericOverflowError,
    SingularMomentError,
    WeakInstrumentError,
)
from .model import VarParams, companion, population_autocov
from .simulate import SeriesPanel

WEAK_IV_LIMIT = 1e10

LS_PROJ = "LS_PROJ"
RC_VAR = "RC_VAR"
TWO_STAGE = "TWO_STAGE"
TWO_STAGE_INFEASIBLE = "TWO_STAGE_INFEASIBLE"


@dataclass(frozen=True)
class VarFit:
    params_hat: VarParams
    residuals: np.ndarray  # (T-p, k), rows for t = p+1..T
    sample_size: int
    bias_corrected: bool = False
    intercept: bool = True
    xtx_inv: Optional[np.ndarray] = None  # (X'X)^{-1}, slopes first
    unstable: bool = False
    data: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def p(self) -> int:
        return self.params_hat.p

    @property
    def k(self) -> int:
        return self.params_hat.k


@dataclass(frozen=True)
class ProjectionFit:
    method: str
    h: int
    p: int
    k: int
    beta_hat: np.ndarray
    cov_hat: np.ndarray
    t_bar: int
    delta: int = 0
    target_row: int = 0
    gamma_hat: Optional[np.ndarray] = None
    resid_proj: Optional[np.ndarray] = None
    diagnostics: tuple = ()

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.cov_hat), 0.0, None) / self.t_bar)

    def coef_index(self, lag: int, col: int) -> int:
        """Position of the coefficient on series ``col`` at lag ``lag`` (1-based lag)."""
        if not 1 <= lag <= self.p or not 0 <= col < self.k:
            raise IndexContractError(f"lag {lag}, column {col} outside p={self.p}, k={self.k}")
        return (lag - 1) * self.k + col


@dataclass(frozen=True)
class ScorePanel:
    s_star: np.ndarray  # (t_bar - p + 1, pK)

    @property
    def omega_s(self) -> np.ndarray:
        s = self.s_star
        return batched_sym(np.swapaxes(s, -1, -2) @ s) / s.shape[-2]


# ---------------------------------------------------------------- array cores


def lag_matrix(y, p, first, last):
    """Rows ``t = first..last`` (0-based) of ``[y_t, y_{t-1}, ..., y_{t-p+1}]``."""
    blocks = [y[..., first - j:last - j + 1, :] for j in range(p)]
    return np.concatenate(blocks, axis=-1)


def _with_intercept(x, intercept):
    if not intercept:
        return x
    return np.concatenate([x, np.ones(x.shape[:-1] + (1,))], axis=-1)


def _equilibrated(a, rows=None):
    """Scale columns (and optionally rows) to unit norm before a condition check."""
    with np.errstate(all="ignore"):
        cn = np.sqrt(np.sum(a * a, axis=-2, keepdims=True))
        out = a / np.where(cn > 0, cn, np.nan)
        if rows is not None:
            rn = np.sqrt(np.sum(out * out, axis=-1, keepdims=True))
            out = out / np.where(rn > 0, rn, np.nan)
    return out


def ls_core(x, y):
    """Least squares by QR for stacked designs.

    Returns ``(coef, xtx_inv, cond)`` where ``cond`` is the condition number
    of the column-equilibrated design.
    """
    q, r = np.linalg.qr(x)
    with np.errstate(all="ignore"):
        cn = np.sqrt(np.sum(x * x, axis=-2))
        cond = batched_cond(r / np.where(cn > 0, cn, np.nan)[..., None, :])
    cond = np.where(np.isfinite(cond), cond, np.inf)
    eye = np.broadcast_to(np.eye(r.shape[-1]), r.shape)
    safe = np.where((cond < np.inf)[..., None, None], r, eye)
    coef = np.linalg.solve(safe, np.swapaxes(q, -1, -2) @ y)
    rinv = np.linalg.solve(safe, eye)
    return coef, rinv @ np.swapaxes(rinv, -1, -2), cond


def var_core(y, p, intercept=True):
    """Batched VAR(p) by LS; slopes are stacked ``[Phi_1 ... Phi_p]``."""
    T, k = y.shape[-2:]
    x = _with_intercept(lag_matrix(y, p, p - 1, T - 2), intercept)
    yy = y[..., p:, :]
    coef, xtx_inv, cond = ls_core(x, yy)
    resid = yy - x @ coef
    slopes = np.swapaxes(coef[..., :p * k, :], -1, -2)  # (k, pk)
    phi = np.stack([slopes[..., :, j * k:(j + 1) * k] for j in range(p)], axis=-3)
    c = coef[..., p * k, :] if intercept else np.zeros(y.shape[:-2] + (k,))
    sigma = batched_sym(np.swapaxes(resid, -1, -2) @ resid) / resid.shape[-2]
    return dict(phi=phi, c=c, resid=resid, sigma=sigma, xtx_inv=xtx_inv, cond=cond)


def impulse_core(phi, n):
    """Batched ``Psi_0..Psi_{n-1}`` for phi of shape (..., p, k, k)."""
    p, k = phi.shape[-3], phi.shape[-1]
    psi = np.zeros(phi.shape[:-3] + (n, k, k))
    psi[..., 0, :, :] = np.eye(k)
    for j in range(1, n):
        acc = 0.0
        for i in range(1, min(j, p) + 1):
            acc = acc + phi[..., i - 1, :, :] @ psi[..., j - i, :, :]
        psi[..., j, :, :] = acc
    return psi


def sigma_zx_core(phi, sigma):
    """``(I_p kron Sigma_u) Psi_bar'`` from fitted coefficients, batched."""
    p, k = phi.shape[-3], phi.shape[-1]
    psi = impulse_core(phi, p)
    out = np.zeros(phi.shape[:-3] + (p * k, p * k))
    for i in range(p):
        for j in range(i + 1):
            out[..., i * k:(i + 1) * k, j * k:(j + 1) * k] = sigma @ np.swapaxes(psi[..., i - j, :, :], -1, -2)
    return out


def score_core(e, u, p):
    """Reordered score rows ``(e_t, ..., e_{t+p-1}) kron u_t`` for aligned e, u."""
    n = e.shape[-1] - p + 1
    blocks = [e[..., j:j + n, None] * u[..., :n, :] for j in range(p)]
    return np.concatenate(blocks, axis=-1)


def hac_core(g, bandwidth):
    """Bartlett long-run variance of stacked scores g (..., n, m)."""
    n = g.shape[-2]
    gt = np.swapaxes(g, -1, -2)
    out = gt @ g / n
    for j in range(1, bandwidth + 1):
        w = 1.0 - j / (bandwidth + 1.0)
        gj = gt[..., :, j:] @ g[..., :n - j, :] / n
        out = out + w * (gj + np.swapaxes(gj, -1, -2))
    return batched_sym(out)


def ls_proj_core(y, p, h, row=0, intercept=True, bandwidth=None, outcome=None, point_only=False):
    """Batched LS projection; ``outcome`` (..., T) replaces series ``row`` as the
    dependent variable when given."""
    T, k = y.shape[-2:]
    bw = h if bandwidth is None else bandwidth
    x = _with_intercept(lag_matrix(y, p, p - 1, T - h - 1), intercept)
    target = y[..., row] if outcome is None else outcome
    yy = target[..., p - 1 + h:, None]
    coef, xtx_inv, cond = ls_core(x, yy)
    e = (yy - x @ coef)[..., 0]
    m = p * k
    if point_only:
        return dict(beta=coef[..., :m, 0], coef=coef[..., 0], resid=e, cond=cond)
    n = x.shape[-2]
    lrv = hac_core(x * e[..., None], bw)
    cov = n * n * (xtx_inv @ lrv @ xtx_inv)
    return dict(beta=coef[..., :m, 0], coef=coef[..., 0], cov=batched_sym(cov[..., :m, :m]),
                resid=e, cond=cond)


def two_stage_core(y, p, h, delta=0, row=0, intercept=True, u=None, var=None, outcome=None,
                   point_only=False):
    """Batched feasible (or infeasible when ``u`` is given) two-stage estimator.

    ``outcome`` optionally replaces series ``row`` as the dependent variable;
    it is indexed like the panel, so entry ``t + h`` pairs with regressors at t.
    """
    T, k = y.shape[-2:]
    if var is None:
        var = var_core(y, p, intercept)
    if u is None:
        u_full = np.concatenate([np.zeros(y.shape[:-2] + (p, k)), var["resid"]], axis=-2)
        sigma = var["sigma"]
    else:
        u_full = u
        sigma = batched_sym(np.swapaxes(u, -1, -2) @ u) / T
    first, last = p - 1 + delta, T - h - 1
    xa = lag_matrix(y, p + delta, first, last)
    z = lag_matrix(u_full, p, first, last)
    if delta:
        z = np.concatenate([z, xa[..., p * k:]], axis=-1)
    x = _with_intercept(xa, intercept)
    z = _with_intercept(z, intercept)
    target = y[..., row] if outcome is None else outcome
    yy = target[..., first + h:]
    n = x.shape[-2]
    zx = np.swapaxes(z, -1, -2) @ x / n
    zy = np.swapaxes(z, -1, -2) @ yy[..., None] / n
    cond = batched_cond(_equilibrated(zx, rows=True))
    cond = np.where(np.isfinite(cond), cond, np.inf)
    ok = cond < np.inf
    eye = np.broadcast_to(np.eye(zx.shape[-1]), zx.shape)
    coef = np.linalg.solve(np.where(ok[..., None, None], zx, eye), zy)[..., 0]
    m = p * k
    if point_only:
        return dict(beta=coef[..., :m], gamma=coef[..., m:m + delta * k], coef=coef, cond=cond)
    # score uses the order-p LS projection residual on t = p..T-h
    lp = ls_proj_core(y, p, h, row, intercept, bandwidth=0, outcome=outcome)
    e = lp["resid"]
    t_bar = T - h - p + 1
    u_al = u_full[..., p - 1:p - 1 + t_bar, :]
    s = score_core(e, u_al, p)
    omega_s = batched_sym(np.swapaxes(s, -1, -2) @ s) / s.shape[-2]
    szx = sigma_zx_core(var["phi"], sigma)
    szx_cond = batched_cond(szx)
    good = szx_cond < COND_LIMIT
    eye_m = np.broadcast_to(np.eye(m), szx.shape)
    cov = batched_sandwich(np.where(good[..., None, None], szx, eye_m), omega_s)
    cov = np.where(good[..., None, None], cov, np.nan)
    resid_2s = yy - (x @ coef[..., None])[..., 0]
    return dict(beta=coef[..., :m], gamma=coef[..., m:m + delta * k], coef=coef, cov=cov,
                resid=e, resid_2s=resid_2s, cond=cond, szx_cond=szx_cond, omega_s=omega_s,
                var=var, t_bar=t_bar)


def matrix_powers(c, n):
    """``C^0, ..., C^{n-1}`` stacked along a new axis -3."""
    out = np.empty(c.shape[:-2] + (n,) + c.shape[-2:])
    out[..., 0, :, :] = np.eye(c.shape[-1])
    for i in range(1, n):
        out[..., i, :, :] = out[..., i - 1, :, :] @ c
    return out


def companion_core(phi):
    p, k = phi.shape[-3], phi.shape[-1]
    out = np.zeros(phi.shape[:-3] + (p * k, p * k))
    for j in range(p):
        out[..., :k, j * k:(j + 1) * k] = phi[..., j, :, :]
    if p > 1:
        out[..., k:, :-k] = np.eye(k * (p - 1))
    return out


def rc_point_core(phi, h, row=0):
    """Row ``row`` of the top block of ``C^h``, batched."""
    c = companion_core(phi)
    ch = np.linalg.matrix_power(c, h) if c.ndim == 2 else _batched_power(c, h)
    return ch[..., row, :]


def _batched_power(c, h):
    out = np.broadcast_to(np.eye(c.shape[-1]), c.shape).copy()
    base = c
    while h:
        if h & 1:
            out = out @ base
        base = base @ base
        h >>= 1
    return out


def rc_jacobian(phi, h, row=0):
    """Jacobian of the RC-VAR coefficient vector with respect to ``[Phi_1 ... Phi_p]``.

    Entry ``[s, c * pK + m]`` is ``d (C^h)[row, s] / d A[c, m]`` where ``A`` is the
    top block row of the companion matrix.
    """
    k = phi.shape[-1]
    c = companion_core(phi)
    pw = matrix_powers(c, h)  # (..., h, pk, pk)
    left = pw[..., :, row, :k]  # (C^i)[row, c]
    right = pw[..., ::-1, :, :]  # C^{h-1-i}[m, s]
    jac = np.einsum("...ic,...ims->...scm", left, right)
    return jac.reshape(jac.shape[:-2] + (-1,))


def rc_cov_core(phi, sigma, xtx_slopes, h, row=0):
    jac = rc_jacobian(phi, h, row)
    kr = np.einsum("...ab,...cd->...acbd", sigma, xtx_slopes)
    n = sigma.shape[-1] * xtx_slopes.shape[-1]
    kr = kr.reshape(kr.shape[:-4] + (n, n))
    return batched_sym(jac @ kr @ np.swapaxes(jac, -1, -2))


# ------------------------------------------------------------------ public API


def _panel_data(panel):
    return panel.data if isinstance(panel, SeriesPanel) else np.atleast_2d(np.asarray(panel, float))


def fit_var_ls(panel, p: int, intercept: bool = True) -> VarFit:
    """Equation-by-equation LS for a VAR(p)."""
    y = _panel_data(panel)
    T, k = y.shape
    if p < 1:
        raise InvalidSpecError("lag order must be >= 1")
    if T < p * (k + 1) + k + 1:
        raise InsufficientDataError(f"T={T} too small for a VAR({p}) in {k} series")
    out = var_core(y, p, intercept)
    if not out["cond"] < COND_LIMIT:
        raise CollinearityError(float(out["cond"]), "VAR lag matrix")
    params = VarParams(out["phi"], out["sigma"], out["c"] if intercept else None)
    return VarFit(params, out["resid"], T, False, intercept, out["xtx_inv"], data=y)


def _bias_term(a, sigma_big, gamma0):
    n = a.shape[0]
    eye = np.eye(n)
    at = a.T
    lam = np.linalg.eigvals(a)
    acc = np.linalg.inv(eye - at) + at @ np.linalg.inv(eye - at @ at)
    for l in lam:
        acc = acc + l * np.linalg.inv(eye - l * at)
    return np.real(sigma_big @ acc @ np.linalg.inv(gamma0))


def pope_bias_correct_phi(phi, sigma_u, n_eff):
    """Bias-corrected coefficients, or ``phi`` unchanged when the fit is not stationary."""
    params = VarParams(phi, sigma_u)
    k, p = params.k, params.p
    a = companion(params)
    if np.abs(np.linalg.eigvals(a)).max() >= 1.0:
        return params.phi
    gam = population_autocov(params, p - 1)
    g0 = np.block([[gam[j - i] if j >= i else gam[i - j].T for j in range(p)] for i in range(p)])
    sig_big = np.zeros_like(a)
    sig_big[:k, :k] = params.sigma_u
    bias = _bias_term(a, sig_big, g0) / n_eff
    # shrink the correction until the corrected companion is stationary
    step = 1.0
    corrected = a + bias
    while np.abs(np.linalg.eigvals(corrected)).max() >= 1.0 and step > 0:
        step = round(step - 0.01, 10)
        corrected = a + step * bias
    return np.stack([corrected[:k, j * k:(j + 1) * k] for j in range(p)])


def pope_bias_correct(fit: VarFit) -> VarFit:
    """First-order LS bias correction with stationarity-preserving shrinkage.

    An already non-stationary fit is returned unchanged with ``unstable`` set.
    Residuals are recomputed under the corrected coefficients when the fit
    carries its data.
    """
    params = fit.params_hat
    if np.abs(np.linalg.eigvals(companion(params))).max() >= 1.0:
        return replace(fit, unstable=True)
    phi = pope_bias_correct_phi(params.phi, params.sigma_u, fit.residuals.shape[0])
    new = VarParams(phi, params.sigma_u, params.intercept)
    resid = fit.residuals if fit.data is None else var_residuals(new, fit.data)
    return replace(fit, params_hat=new, bias_corrected=True, residuals=resid)


def var_residuals(params: VarParams, data) -> np.ndarray:
    """``y_t - c - sum_j Phi_j y_{t-j}`` for t = p+1..T."""
    y = _panel_data(data)
    T, k = y.shape
    p = params.p
    x = lag_matrix(y, p, p - 1, T - 2)
    slopes = np.concatenate(list(params.phi), axis=1)
    return y[p:] - params.c - x @ slopes.T


def hac_lrv(score, bandwidth: int) -> np.ndarray:
    """Bartlett-kernel long-run variance ``G_0 + sum_j w_j (G_j + G_j')``."""
    g = np.asarray(score, dtype=float)
    if g.ndim == 1:
        g = g[:, None]
    if bandwidth < 0 or bandwidth >= g.shape[0]:
        raise InvalidBandwidthError(f"bandwidth {bandwidth} must lie in [0, n={g.shape[0]})")
    return hac_core(g, int(bandwidth))


def _projection_checks(T, p, k, h, delta=0):
    if h < 1:
        raise InvalidHorizonError(f"horizon must be >= 1, got {h}")
    if p < 1:
        raise InvalidSpecError("lag order must be >= 1")
    t_bar = T - h - p + 1
    if t_bar - delta < (p + delta) * k + 1:
        raise InsufficientDataError(f"T_bar={t_bar} too small for {(p + delta) * k} regressors")
    return t_bar


def ls_projection(panel, p: int, h: int, target_row: int = 0, intercept: bool = True,
                  bandwidth: Optional[int] = None) -> ProjectionFit:
    """LS projection of ``y_{r,t+h}`` on p lags with a Bartlett HAC covariance."""
    y = _panel_data(panel)
    T, k = y.shape
    t_bar = _projection_checks(T, p, k, h)
    bw = h if bandwidth is None else int(bandwidth)
    if bw < 0 or bw >= t_bar:
        raise InvalidBandwidthError(f"bandwidth {bw} must lie in [0, {t_bar})")
    out = ls_proj_core(y, p, h, target_row, intercept, bw)
    if not out["cond"] < COND_LIMIT:
        raise CollinearityError(float(out["cond"]), "projection regressors")
    return ProjectionFit(LS_PROJ, h, p, k, out["beta"], out["cov"], t_bar,
                         target_row=target_row, resid_proj=out["resid"])


def rc_var_gir(fit: VarFit, h: int, target_row: int = 0) -> ProjectionFit:
    """Recursive VAR GIR with a delta-method covariance."""
    if h < 1:
        raise InvalidHorizonError(f"horizon must be >= 1, got {h}")
    params = fit.params_hat
    p, k = params.p, params.k
    with np.errstate(over="ignore", invalid="ignore"):
        beta = rc_point_core(params.phi, h, target_row)
        if not np.all(np.isfinite(beta)):
            raise NumericOverflowError(h)
        xtx = fit.xtx_inv[:p * k, :p * k]
        cov = rc_cov_core(params.phi, params.sigma_u, xtx, h, target_row)
    t_bar = fit.sample_size - h - p + 1
    if not np.all(np.isfinite(cov)):
        raise NumericOverflowError(h)
    return ProjectionFit(RC_VAR, h, p, k, beta, t_bar * cov, t_bar, target_row=target_row)


def reordered_score(resid_proj, u_hat, p: int, h: Optional[int] = None) -> ScorePanel:
    """Reordered score ``(e_t, ..., e_{t+p-1}) kron u_t`` on aligned series.

    ``resid_proj`` and ``u_hat`` must cover the same dates; the result has
    ``len - p + 1`` rows.
    """
    e = np.asarray(resid_proj, dtype=float).reshape(-1)
    u = np.asarray(u_hat, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.shape[0] != e.shape[0]:
        raise IndexContractError(f"projection residuals ({e.shape[0]}) and VAR residuals "
                                 f"({u.shape[0]}) must be aligned")
    if e.shape[0] < p:
        raise IndexContractError("fewer aligned rows than the lag order")
    return ScorePanel(score_core(e, u, p))


def robust_cov(score: ScorePanel, params_hat: VarParams, p: Optional[int] = None,
               h: Optional[int] = None) -> np.ndarray:
    """``Sigma_zx^{-1} Omega_s Sigma_zx'^{-1}`` with ``Sigma_zx`` from the fitted VAR."""
    szx = sigma_zx_core(params_hat.phi, params_hat.sigma_u)
    cond = np.linalg.cond(szx)
    if not cond < COND_LIMIT:
        raise SingularMomentError(float(cond), "Sigma_zx")
    return batched_sandwich(szx, score.omega_s)


def two_stage(panel, p: int, h: int, delta: int = 0, target_row: int = 0,
              intercept: bool = True, u=None, var_fit: Optional[VarFit] = None) -> ProjectionFit:
    """Two-stage projection estimator with optional lag augmentation.

    Instruments are the VAR residuals ``u_t, ..., u_{t-p+1}`` (estimated, or
    the true innovations when ``u`` is supplied); with ``delta > 0`` the extra
    lags ``y_{t-p}, ...`` enter both the regressors and the instruments and
    their coefficients are returned as ``gamma_hat``.
    """
    y = _panel_data(panel)
    T, k = y.shape
    if delta not in (0, 1, 2):
        raise InvalidSpecError(f"lag augmentation must be 0, 1 or 2, got {delta}")
    t_bar = _projection_checks(T, p, k, h, delta)
    if u is not None:
        u = np.asarray(u, dtype=float)
        if u.shape != y.shape:
            raise IndexContractError(f"provided innovations {u.shape} must match the panel {y.shape}")
    var = None
    if var_fit is not None:
        var = dict(phi=var_fit.params_hat.phi, sigma=var_fit.params_hat.sigma_u,
                   resid=var_fit.residuals)
    elif T >= p * (k + 1) + k + 1:
        fit = fit_var_ls(y, p, intercept)
        var = dict(phi=fit.params_hat.phi, sigma=fit.params_hat.sigma_u, resid=fit.residuals)
    else:
        raise InsufficientDataError(f"T={T} too small for the first-stage VAR({p})")
    out = two_stage_core(y, p, h, delta, target_row, intercept, u, var)
    if not out["cond"] < WEAK_IV_LIMIT:
        raise WeakInstrumentError(float(out["cond"]), "sum z x'")
    if not out["szx_cond"] < COND_LIMIT:
        raise SingularMomentError(float(out["szx_cond"]), "Sigma_zx")
    diag = []
    if delta >= 1 and h * h / T > 0.2:
        diag.append(f"h^2/T = {h * h / T:.3g} exceeds 0.2; lag-augmented inference may be unreliable")
        warnings.warn(diag[-1], RuntimeWarning, stacklevel=2)
    method = TWO_STAGE if u is None else TWO_STAGE_INFEASIBLE
    return ProjectionFit(method, h, p, k, out["beta"], out["cov"], t_bar, delta, target_row,
                         out["gamma"], out["resid"], tuple(diag))


METHOD_ALIASES = {
    "2s": TWO_STAGE, "two_stage": TWO_STAGE, TWO_STAGE: TWO_STAGE,
    "ls": LS_PROJ, "ls_proj": LS_PROJ, LS_PROJ: LS_PROJ,
    "rc": RC_VAR, "rc_var": RC_VAR, RC_VAR: RC_VAR,
}


@dataclass(frozen=True)
class EstimatorSpec:
    """A projection estimator with its tuning choices.

    ``bandwidth`` applies to LS projection only (default h). ``bias_correct``
    applies the first-order VAR bias correction before RC-VAR.
    """

    method: str
    p: int
    h: int
    delta: int = 0
    target_row: int = 0
    intercept: bool = True
    bandwidth: Optional[int] = None
    bias_correct: bool = False

    def __post_init__(self):
        method = METHOD_ALIASES.get(self.method, METHOD_ALIASES.get(self.method.lower()))
        if method is None:
            raise InvalidSpecError(f"unknown estimator {self.method!r}")
        object.__setattr__(self, "method", method)
        if self.h < 1:
            raise InvalidHorizonError(f"horizon must be >= 1, got {self.h}")
        if self.p < 1:
            raise InvalidSpecError("lag order must be >= 1")
        if self.delta not in (0, 1, 2):
            raise InvalidSpecError(f"lag augmentation must be 0, 1 or 2, got {self.delta}")

    @property
    def label(self) -> str:
        if self.method == TWO_STAGE:
            return f"2S({self.delta})"
        return {LS_PROJ: "LS-Proj", RC_VAR: "RC-VAR"}[self.method]

    def fit(self, panel) -> ProjectionFit:
        if self.method == TWO_STAGE:
            return two_stage(panel, self.p, self.h, self.delta, self.target_row, self.intercept)
        if self.method == LS_PROJ:
            return ls_projection(panel, self.p, self.h, self.target_row, self.intercept, self.bandwidth)
        fit = fit_var_ls(panel, self.p, self.intercept)
        if self.bias_correct:
            fit = pope_bias_correct(fit)
        return rc_var_gir(fit, self.h, self.target_row)

    def fit_batch(self, y, var=None, outcome=None):
        """Estimate on stacked samples ``y`` (..., T, k).

        Returns ``(beta, cov, ok)`` where ``ok`` flags samples whose moment
        matrices passed the conditioning guards.
        """
        p, h, row = self.p, self.h, self.target_row
        with np.errstate(all="ignore"):
            if self.method == TWO_STAGE:
                out = two_stage_core(y, p, h, self.delta, row, self.intercept, var=var, outcome=outcome)
                ok = (out["cond"] < WEAK_IV_LIMIT) & (out["szx_cond"] < COND_LIMIT)
                beta, cov = out["beta"], out["cov"]
            elif self.method == LS_PROJ:
                out = ls_proj_core(y, p, h, row, self.intercept, self.bandwidth, outcome=outcome)
                ok = out["cond"] < COND_LIMIT
                beta, cov = out["beta"], out["cov"]
            else:
                var = var_core(y, p, self.intercept) if var is None else var
                phi = var["phi"]
                if self.bias_correct:
                    phi = np.stack([pope_bias_correct_phi(f, s, y.shape[-2] - p)
                                    for f, s in zip(phi.reshape((-1,) + phi.shape[-3:]),
                                                    var["sigma"].reshape((-1,) + var["sigma"].shape[-2:]))]
                                   ).reshape(phi.shape)
                m = p * y.shape[-1]
                beta = rc_point_core(phi, h, row)
                cov = (y.shape[-2] - h - p + 1) * rc_cov_core(phi, var["sigma"], var["xtx_inv"][..., :m, :m], h, row)
                ok = var["cond"] < COND_LIMIT
            ok = ok & np.all(np.isfinite(beta), axis=-1) & np.all(np.isfinite(cov), axis=(-1, -2))
        return beta, cov, ok
