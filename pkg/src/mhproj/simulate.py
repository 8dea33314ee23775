"""Path generation, residual resampling and seeded random streams."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._linalg import sym_sqrt
from .errors import InsufficientDataError, InvalidHorizonError, InvalidSpecError
from .model import DgpSpec, VarParams, impulse_responses


@dataclass
class SeriesPanel:
    data: np.ndarray
    names: Sequence[str] = None
    origin: str = "simulated"
    dates: Optional[list] = field(default=None, repr=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2 or data.shape[0] < 1:
            raise InvalidSpecError(f"panel data must be T x k with T >= 1, got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise InvalidSpecError("panel data must be finite")
        names = list(self.names) if self.names is not None else [f"y{i + 1}" for i in range(data.shape[1])]
        if len(names) != data.shape[1]:
            raise InvalidSpecError("one name per column required")
        if len(set(names)) != len(names):
            raise InvalidSpecError("series names must be unique")
        if self.dates is not None and len(self.dates) != data.shape[0]:
            raise InvalidSpecError("one date label per row required")
        self.data = data
        self.names = names

    @property
    def T(self) -> int:
        return self.data.shape[0]

    @property
    def k(self) -> int:
        return self.data.shape[1]


@dataclass
class RngStream:
    """Random stream keyed by ``(master_seed, stream_id)``.

    The key is fed to a ``SeedSequence`` driving a counter-based Philox
    generator, so the same key always reproduces the same draws and distinct
    keys give independent streams. ``stream_id`` may be an int or a tuple of
    ints; :meth:`child` extends it.
    """

    master_seed: int
    stream_id: tuple = ()
    gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        sid = self.stream_id
        if isinstance(sid, (int, np.integer)):
            sid = (int(sid),)
        self.stream_id = tuple(int(s) for s in sid)
        seq = np.random.SeedSequence(int(self.master_seed), spawn_key=self.stream_id)
        self.gen = np.random.Generator(np.random.Philox(seq))

    def child(self, *ids) -> "RngStream":
        return RngStream(self.master_seed, self.stream_id + tuple(int(i) for i in ids))

    def standard_normal(self, size):
        return self.gen.standard_normal(size)

    def integers(self, low, high=None, size=None):
        return self.gen.integers(low, high, size=size)


def draw_innovations(sigma_u, shape, rng: RngStream, innovation: str = "gaussian", df=None):
    """Draws with covariance ``sigma_u``; shape is (..., T, k)."""
    root = sym_sqrt(sigma_u)
    if innovation == "gaussian":
        z = rng.standard_normal(shape)
    elif innovation == "t":
        if df is None or df <= 2:
            raise InvalidSpecError("scaled-t innovations need df > 2")
        z = rng.gen.standard_t(df, size=shape) * np.sqrt((df - 2.0) / df)
    else:
        raise InvalidSpecError(f"unknown innovation law {innovation!r}")
    return z @ root


def var_recursion(phi, intercept, innovations, initial=None):
    """Run the VAR forward over stacked innovation paths.

    ``innovations`` has shape (..., T, k). Row t of the output is
    ``c + sum_j phi_j y_{t-j} + u_t``, with pre-sample values from
    ``initial`` (shape (..., p, k), oldest first) or zero.
    """
    phi = np.asarray(phi, dtype=float)
    p, k, _ = phi.shape
    u = np.asarray(innovations, dtype=float)
    batch = u.shape[:-2]
    T = u.shape[-2]
    y = np.empty(batch + (T + p, k))
    if initial is None:
        y[..., :p, :] = 0.0
    else:
        y[..., :p, :] = initial
    c = np.zeros(k) if intercept is None else np.asarray(intercept, dtype=float)
    # stacked lag matrix: y_t = c + [y_{t-1}, ..., y_{t-p}] @ big
    big = np.concatenate([phi[j].T for j in range(p)], axis=0)  # (pk, k)
    for t in range(T):
        lags = y[..., t:t + p, :][..., ::-1, :].reshape(batch + (p * k,))
        y[..., t + p, :] = c + lags @ big + u[..., t, :]
    return y[..., p:, :]


def simulate_var(params: VarParams, T: int, rng: RngStream, innovation: str = "gaussian",
                 df=None, burn_in: int = 0, names=None) -> SeriesPanel:
    """Simulate ``T`` observations from zero initial conditions."""
    if T < params.p + 1:
        raise InsufficientDataError(f"T={T} must exceed p={params.p}")
    if burn_in < 0:
        raise InvalidSpecError("burn_in must be non-negative")
    u = draw_innovations(params.sigma_u, (T + burn_in, params.k), rng, innovation, df)
    y = var_recursion(params.phi, params.intercept, u)[burn_in:]
    return SeriesPanel(y, names=names, origin="simulated")


def simulate_dgp(spec: DgpSpec, T: int, rng: RngStream, burn_in: int = 0) -> SeriesPanel:
    from .model import dgp_from_roots

    return simulate_var(dgp_from_roots(spec), T, rng, spec.innovation, spec.df, burn_in)


def wild_bootstrap_residuals(residuals, rng: RngStream) -> np.ndarray:
    """Multiply each residual row by its own standard normal scalar."""
    r = np.asarray(residuals, dtype=float)
    eps = rng.standard_normal(r.shape[0])
    return r * eps[:, None]


def bootstrap_initial_block(panel: SeriesPanel, p: int, rng: RngStream) -> np.ndarray:
    """A block of ``p`` consecutive rows with uniformly drawn start."""
    T = panel.T
    if T < p:
        raise InsufficientDataError(f"need at least p={p} rows, have {T}")
    start = int(rng.integers(0, T - p + 1))
    return panel.data[start:start + p].copy()


def mc_gaussian_residuals(sigma_hat, T: int, rng: RngStream) -> np.ndarray:
    sigma_hat = np.atleast_2d(np.asarray(sigma_hat, dtype=float))
    return draw_innovations(sigma_hat, (T, sigma_hat.shape[0]), rng)


def projection_residuals_from_irf(u_star, params: VarParams, h: int, target_row: int = 0) -> np.ndarray:
    """First element of ``sum_{i<h} Psi_i u*_{t+h-i}`` for t = p..T-h (1-based)."""
    u = np.asarray(u_star, dtype=float)
    T = u.shape[-2]
    p = params.p
    if h < 1 or h >= T - p:
        raise InvalidHorizonError(f"horizon {h} must satisfy 1 <= h < T - p = {T - p}")
    psi = impulse_responses(params, h)[:, target_row, :]  # (h, k)
    n = T - h - p + 1
    out = np.zeros(u.shape[:-2] + (n,))
    for i in range(h):
        # 0-based row of u_{t+h-i} for t = p..T-h is (p - 1 + h - i) .. (T - 1 - i)
        start = p - 1 + h - i
        out += u[..., start:start + n, :] @ psi[i]
    return out
