import numpy as np
from scipy import linalg

from .errors import InvalidCovarianceError, SingularMomentError

COND_LIMIT = 1e12


def guarded_solve(a, b, cond_limit=COND_LIMIT, error=SingularMomentError, detail=""):
    """Solve ``a x = b`` with LU after rejecting ill-conditioned ``a``."""
    a = np.asarray(a, dtype=float)
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > cond_limit:
        raise error(float(cond), detail)
    return linalg.solve(a, b)


def sandwich(a, middle, cond_limit=COND_LIMIT, error=SingularMomentError, detail=""):
    """Return ``a^{-1} middle a'^{-1}`` symmetrised."""
    left = guarded_solve(a, middle, cond_limit, error, detail)
    out = guarded_solve(a, left.T, cond_limit, error, detail).T
    return 0.5 * (out + out.T)


def sym_sqrt(cov, tol=1e-10):
    """Symmetric (spectral) square root of a PSD matrix."""
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if cov.shape[0] != cov.shape[1] or not np.all(np.isfinite(cov)):
        raise InvalidCovarianceError("covariance must be a finite square matrix")
    if not np.allclose(cov, cov.T, atol=1e-12 * max(1.0, np.abs(cov).max())):
        raise InvalidCovarianceError("covariance must be symmetric")
    w, v = np.linalg.eigh(0.5 * (cov + cov.T))
    scale = max(1.0, np.abs(w).max())
    if w.min() < -tol * scale:
        raise InvalidCovarianceError(f"covariance not PSD (min eigenvalue {w.min():.3g})")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def batched_sym(a):
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def batched_cond(a):
    """Condition number per stacked matrix; inf where singular."""
    with np.errstate(all="ignore"):
        s = np.linalg.svd(a, compute_uv=False)
        c = s[..., 0] / s[..., -1]
    return np.where(np.isfinite(c), c, np.inf)


def batched_sandwich(a, middle):
    left = np.linalg.solve(a, middle)
    out = np.swapaxes(np.linalg.solve(a, np.swapaxes(left, -1, -2)), -1, -2)
    return batched_sym(out)
