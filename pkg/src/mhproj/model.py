"""Exact VAR algebra: generalized impulse responses, companion forms,
root-matrix DGPs and closed-form population moments.

All quantities are for a K-dimensional VAR(p)

    y_t = c + Phi_1 y_{t-1} + ... + Phi_p y_{t-p} + u_t,   E[u_t u_t'] = Sigma_u,

and the horizon-h projection ``y_{t+h} = sum_j Phi_j^{(h)} y_{t+1-j} + u_t^{(h)}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from ._linalg import COND_LIMIT, sandwich
from .errors import (
    InvalidHorizonError,
    InvalidSpecError,
    NumericOverflowError,
    StationarityError,
)

UNIT_ROOT_TOL = 1e-8


@dataclass(frozen=True)
class VarParams:
    """Coefficients of a VAR(p).

    ``phi`` is stored as an array of shape ``(p, k, k)`` with ``phi[j-1]``
    the lag-j coefficient matrix.
    """

    phi: np.ndarray
    sigma_u: np.ndarray
    intercept: Optional[np.ndarray] = None

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        if phi.ndim == 2:
            phi = phi[None]
        if phi.ndim != 3 or phi.shape[1] != phi.shape[2] or phi.shape[0] < 1:
            raise InvalidSpecError(f"phi must have shape (p, k, k), got {phi.shape}")
        k = phi.shape[1]
        sigma = np.atleast_2d(np.asarray(self.sigma_u, dtype=float))
        if sigma.shape != (k, k):
            raise InvalidSpecError(f"sigma_u must be {k}x{k}, got {sigma.shape}")
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(sigma))):
            raise InvalidSpecError("VAR parameters must be finite")
        if not np.allclose(sigma, sigma.T, atol=1e-10 * max(1.0, np.abs(sigma).max())):
            raise InvalidSpecError("sigma_u must be symmetric")
        if np.linalg.eigvalsh(0.5 * (sigma + sigma.T)).min() < -1e-10 * max(1.0, np.abs(sigma).max()):
            raise InvalidSpecError("sigma_u must be positive semi-definite")
        c = self.intercept
        if c is not None:
            c = np.asarray(c, dtype=float).reshape(-1)
            if c.shape != (k,) or not np.all(np.isfinite(c)):
                raise InvalidSpecError(f"intercept must be a finite {k}-vector")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "sigma_u", sigma)
        object.__setattr__(self, "intercept", c)

    @property
    def k(self) -> int:
        return self.phi.shape[1]

    @property
    def p(self) -> int:
        return self.phi.shape[0]

    @property
    def c(self) -> np.ndarray:
        return np.zeros(self.k) if self.intercept is None else self.intercept


@dataclass(frozen=True)
class GirSet:
    """GIR matrices ``Phi_1^{(h)}, ..., Phi_p^{(h)}`` at one horizon."""

    h: int
    coeffs: np.ndarray  # (p, k, k)

    @property
    def psi_h(self) -> np.ndarray:
        return self.coeffs[0]

    def beta(self, row: int = 0) -> np.ndarray:
        """Row ``row`` of every lag matrix, stacked lag by lag (length pK)."""
        return self.coeffs[:, row, :].reshape(-1)


@dataclass(frozen=True)
class DgpSpec:
    """Simulation recipe built from one or two root matrices.

    The lag polynomial is ``Pi^{-1} (I - P_a L)(I - P_b L) Pi``; ``rotation``
    defaults to the identity.
    """

    roots: Sequence[np.ndarray]
    sigma_u: np.ndarray
    rotation: Optional[np.ndarray] = None
    innovation: str = "gaussian"
    df: Optional[float] = None

    def __post_init__(self):
        roots = [np.atleast_2d(np.asarray(r, dtype=float)) for r in self.roots]
        if len(roots) not in (1, 2):
            raise InvalidSpecError("a DGP takes one or two root matrices")
        k = roots[0].shape[0]
        for r in roots:
            if r.shape != (k, k):
                raise InvalidSpecError("root matrices must all be k x k")
        object.__setattr__(self, "roots", tuple(roots))
        object.__setattr__(self, "sigma_u", np.atleast_2d(np.asarray(self.sigma_u, dtype=float)))
        if self.rotation is not None:
            object.__setattr__(self, "rotation", np.atleast_2d(np.asarray(self.rotation, dtype=float)))
        if self.innovation not in ("gaussian", "t"):
            raise InvalidSpecError(f"unknown innovation law {self.innovation!r}")
        if self.innovation == "t" and (self.df is None or self.df <= 2):
            raise InvalidSpecError("scaled-t innovations need df > 2")

    @property
    def delta_class(self) -> int:
        return persistence_class(self)


@dataclass(frozen=True)
class PopulationMoments:
    autocov: list
    sigma_zx: np.ndarray
    omega_s: np.ndarray
    omega_beta: np.ndarray
    omega_ls: Optional[np.ndarray]


def companion(params: VarParams) -> np.ndarray:
    k, p = params.k, params.p
    out = np.zeros((k * p, k * p))
    out[:k] = np.concatenate(list(params.phi), axis=1)
    if p > 1:
        out[k:, :-k] = np.eye(k * (p - 1))
    return out


def spectral_radius(params: VarParams) -> float:
    return float(np.abs(np.linalg.eigvals(companion(params))).max())


def gir_recursion(params: VarParams, h_max: int) -> list[GirSet]:
    """GIRs for h = 1..h_max via ``Phi_j^{(h+1)} = Phi_{j+1}^{(h)} + Phi_1^{(h)} Phi_j``."""
    if h_max < 1:
        raise InvalidHorizonError(f"h_max must be >= 1, got {h_max}")
    phi = params.phi
    p = params.p
    cur = phi.copy()
    out = [GirSet(1, cur)]
    with np.errstate(over="ignore", invalid="ignore"):
        for h in range(2, h_max + 1):
            nxt = np.empty_like(cur)
            lead = cur[0]
            for j in range(p):
                nxt[j] = lead @ phi[j]
                if j + 1 < p:
                    nxt[j] += cur[j + 1]
            if not np.all(np.isfinite(nxt)):
                raise NumericOverflowError(h)
            cur = nxt
            out.append(GirSet(h, cur))
    return out


def impulse_responses(params: VarParams, n: int) -> np.ndarray:
    """Sims responses ``Psi_0 = I, Psi_1, ..., Psi_{n-1}`` as an (n, k, k) array."""
    k, p = params.k, params.p
    psi = np.zeros((max(n, 1), k, k))
    psi[0] = np.eye(k)
    for j in range(1, n):
        for i in range(1, min(j, p) + 1):
            psi[j] += params.phi[i - 1] @ psi[j - i]
    return psi[:n]


def dgp_from_roots(spec: DgpSpec) -> VarParams:
    roots = spec.roots
    k = roots[0].shape[0]
    if len(roots) == 2:
        pa, pb = roots
        phi = np.stack([pa + pb, -pa @ pb])
    else:
        phi = roots[0][None].copy()
    if spec.rotation is not None:
        rot = spec.rotation
        if rot.shape != (k, k):
            raise InvalidSpecError("rotation must be k x k")
        if np.linalg.cond(rot) > COND_LIMIT:
            raise InvalidSpecError("rotation matrix is singular")
        rot_inv = np.linalg.inv(rot)
        phi = np.stack([rot_inv @ m @ rot for m in phi])
    return VarParams(phi=phi, sigma_u=spec.sigma_u)


def persistence_class(spec: DgpSpec, tol: float = UNIT_ROOT_TOL) -> int:
    mods = np.concatenate([np.abs(np.linalg.eigvals(r)) for r in spec.roots])
    return int(min(2, np.sum(mods >= 1.0 - tol)))


def population_autocov(params: VarParams, max_lag: int) -> list[np.ndarray]:
    """Autocovariances ``Gamma_m = E[y_t y_{t-m}']`` for m = 0..max_lag."""
    comp = companion(params)
    rho = np.abs(np.linalg.eigvals(comp)).max()
    if rho >= 1.0 - UNIT_ROOT_TOL:
        raise StationarityError(f"spectral radius {rho:.6g} >= 1; autocovariances undefined")
    k, p = params.k, params.p
    big_sigma = np.zeros_like(comp)
    big_sigma[:k, :k] = params.sigma_u
    state = linalg.solve_discrete_lyapunov(comp, big_sigma)
    state = 0.5 * (state + state.T)
    gam = [state[:k, j * k:(j + 1) * k] for j in range(p)]
    for m in range(p, max_lag + 1):
        gam.append(sum(params.phi[i] @ gam[m - i - 1] for i in range(p)))
    return [g.copy() for g in gam[: max_lag + 1]]


def _gamma(gam, m):
    return gam[m] if m >= 0 else gam[-m].T


def projection_error_autocov(params: VarParams, h: int, target_row: int = 0) -> np.ndarray:
    """``gamma_e(m) = Cov(e_t, e_{t+m})`` for m = 0..h-1 under i.i.d. innovations."""
    psi = impulse_responses(params, h)[:, target_row, :]  # (h, k)
    s = params.sigma_u
    return np.array([sum(psi[i] @ s @ psi[i + m] for i in range(h - m)) for m in range(h)])


def omega_s_closed(params: VarParams, h: int, target_row: int = 0) -> np.ndarray:
    """Long-run variance of the two-stage score, valid for i.i.d. innovations."""
    if h < 1:
        raise InvalidHorizonError(f"horizon must be >= 1, got {h}")
    ge = projection_error_autocov(params, h, target_row)
    k, p = params.k, params.p
    out = np.zeros((p * k, p * k))
    for a in range(p):
        for b in range(p):
            m = abs(a - b)
            if m < h:
                out[a * k:(a + 1) * k, b * k:(b + 1) * k] = ge[m] * params.sigma_u
    return out


def psi_bar(params: VarParams) -> np.ndarray:
    """Block upper-triangular matrix with block (i, j) = Psi_{j-i} for j >= i."""
    k, p = params.k, params.p
    psi = impulse_responses(params, p)
    out = np.zeros((p * k, p * k))
    for i in range(p):
        for j in range(i, p):
            out[i * k:(i + 1) * k, j * k:(j + 1) * k] = psi[j - i]
    return out


def sigma_zx_closed(params: VarParams) -> np.ndarray:
    return np.kron(np.eye(params.p), params.sigma_u) @ psi_bar(params).T


def omega_beta_closed(params: VarParams, h: int, target_row: int = 0) -> np.ndarray:
    return sandwich(
        sigma_zx_closed(params), omega_s_closed(params, h, target_row), detail="Sigma_zx"
    )


def lagged_cross_moment(gam, p: int, k: int, lead: int) -> np.ndarray:
    """``E[x_t x_{t+lead}']`` for the stacked regressor x_t = (y_t', ..., y_{t-p+1}')'."""
    out = np.zeros((p * k, p * k))
    for a in range(p):
        for b in range(p):
            out[a * k:(a + 1) * k, b * k:(b + 1) * k] = _gamma(gam, b - a - lead)
    return out


def omega_ls_closed(params: VarParams, h: int, target_row: int = 0, autocov=None) -> np.ndarray:
    """Asymptotic variance of the LS projection under i.i.d. innovations.

    ``autocov`` may supply precomputed ``Gamma_0..Gamma_L`` with L >= h + p.
    """
    if h < 1:
        raise InvalidHorizonError(f"horizon must be >= 1, got {h}")
    k, p = params.k, params.p
    gam = population_autocov(params, h + p) if autocov is None else autocov
    ge = projection_error_autocov(params, h, target_row)
    exx = lagged_cross_moment(gam, p, k, 0)
    middle = ge[0] * exx
    for m in range(1, h):
        cross = lagged_cross_moment(gam, p, k, m)
        middle = middle + ge[m] * (cross + cross.T)
    return sandwich(exx, middle, detail="E[x x']")


def population_moments(params: VarParams, h: int, max_lag: Optional[int] = None,
                       target_row: int = 0) -> PopulationMoments:
    stationary = spectral_radius(params) < 1.0 - UNIT_ROOT_TOL
    max_lag = params.p if max_lag is None else max_lag
    return PopulationMoments(
        autocov=population_autocov(params, max_lag) if stationary else [],
        sigma_zx=sigma_zx_closed(params),
        omega_s=omega_s_closed(params, h, target_row),
        omega_beta=omega_beta_closed(params, h, target_row),
        omega_ls=omega_ls_closed(params, h, target_row) if stationary else None,
    )


# Designs from the simulation study.
SIGMA_TABLES = np.array([[1.0, 0.5], [0.5, 1.0]])
ROOTS_STATIONARY = (np.array([[0.7, -0.2], [0.0, 0.7]]), np.array([[0.4, 0.0], [0.2, 0.4]]))
ROOTS_I1 = (np.array([[0.7, -0.2], [0.0, 1.0]]), np.array([[0.4, 0.0], [0.2, 0.4]]))
ROOTS_I2 = (np.array([[0.7, -0.2], [0.0, 1.0]]), np.array([[1.0, 0.0], [0.2, 0.4]]))
ROOTS_WHITE_NOISE = (np.zeros((2, 2)), np.zeros((2, 2)))

NAMED_DGPS = {
    "white_noise": ROOTS_WHITE_NOISE,
    "stationary": ROOTS_STATIONARY,
    "i1": ROOTS_I1,
    "i2": ROOTS_I2,
}


def named_dgp(name: str, sigma_u=SIGMA_TABLES) -> DgpSpec:
    try:
        roots = NAMED_DGPS[name]
    except KeyError:
        raise InvalidSpecError(f"unknown DGP {name!r}; choose from {sorted(NAMED_DGPS)}") from None
    return DgpSpec(roots=roots, sigma_u=sigma_u)
