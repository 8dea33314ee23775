"""Where two-stage projection beats least squares: AR(2) efficiency map."""
import numpy as np

from mhproj.experiments import efficiency_grid, efficiency_mc_check

print("Asymptotic sd ratio sd_2s / sd_ls for the first lag coefficient of an AR(2)")
print("with roots (rho1, rho2). Values below 1 favour the two-stage estimator.\n")

rho1 = np.round(np.arange(0.1, 1.0, 0.2), 2)
horizons = [1, 3, 6, 12, 24]
for rho2 in (0.8, 0.5, 0.2, -0.5):
    cells = efficiency_grid([rho2], tuple(rho1), horizons)
    print(f"rho2 = {rho2}")
    print("  rho1 " + "".join(f"{'h=' + str(h):>8}" for h in horizons))
    for r in rho1:
        row = [c.ratio for c in cells if c.rho1 == r and c.coef == 1]
        print(f"  {r:4.1f} " + "".join(f"{v:8.3f}" for v in row))
    print()

print("At h=1 the ratio never drops below 1: LS is the efficient estimator there.")
print("\nThe closed form agrees with simulation (T=100000, 2000 paths):")
res = efficiency_mc_check(0.5, 0.5, 12)
for name, (mc, closed) in res.items():
    print(f"  {name}: simulated {np.round(mc, 3)}  closed form {np.round(closed, 3)}")
