"""Multi-horizon coefficients of a bivariate VAR(2) and how fast they decay."""
import numpy as np

from mhproj import dgp_from_roots, gir_recursion, named_dgp, omega_s_closed
from mhproj.model import VarParams, spectral_radius

spacer = "_" * 60

print("The stationary design factors the lag polynomial through two root matrices.")
prm = dgp_from_roots(named_dgp("stationary"))
print("Phi_1 =\n", prm.phi[0])
print("Phi_2 =\n", prm.phi[1])
print("spectral radius of the companion matrix:", round(spectral_radius(prm), 4))

print(spacer)
print("\nProjecting y_{t+h} on (y_t, y_{t-1}) gives coefficient matrices Phi_j^(h).")
print("The (1,2) entries at each horizon:")
girs = gir_recursion(prm, 36)
print(f"{'h':>4} {'phi_12,1':>12} {'phi_12,2':>12}")
for h in (1, 3, 6, 12, 24, 36):
    c = girs[h - 1].coeffs
    print(f"{h:>4} {c[0, 0, 1]:>12.3e} {c[1, 0, 1]:>12.3e}")

print("\nWith one unit root the same entries do not die out:")
i1 = gir_recursion(dgp_from_roots(named_dgp("i1")), 36)
for h in (3, 12, 36):
    print(f"  h={h:>2}: phi_12,1 = {i1[h - 1].coeffs[0, 0, 1]: .3f}")

print(spacer)
print("\nThe two-stage score variance has a closed form. For a scalar random walk")
print("fitted with two lags it is [[h, h-1], [h-1, h]]:")
rw = VarParams(np.array([[[1.0]], [[0.0]]]), [[1.0]])
for h in (1, 2, 5):
    om = omega_s_closed(rw, h)
    print(f"  h={h}: {om.tolist()}  largest eigenvalue {np.linalg.eigvalsh(om).max():.1f}")
