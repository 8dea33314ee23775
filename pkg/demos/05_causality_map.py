"""Multi-horizon causality map on a synthetic five-variable panel."""
import numpy as np

from mhproj import SeriesPanel, empirical_causality
from mhproj.model import VarParams
from mhproj.simulate import RngStream, simulate_var

names = ["CFNAI", "JNL", "Unemp", "Inflation", "FFR"]
print("A VAR(1) where JNL drives CFNAI and nothing else crosses over.")
phi = 0.5 * np.eye(5)
phi[0, 1] = 0.3
panel = simulate_var(VarParams(phi[None], np.eye(5)), 400, RngStream(1))
panel = SeriesPanel(panel.data, names=names)

cmap = empirical_causality(panel, orders=(2, 3, 4), horizons=range(1, 7))
print("\nHorizons where the null of non-causality is rejected at 5% for every order:")
print(cmap.summary(0.95))

print("p-values for JNL -> CFNAI by order:")
for h in range(1, 7):
    cell = cmap.get("JNL", "CFNAI", h)
    ps = "  ".join(f"p={o}: {cell.pvalues[o]:.2e}" for o in cmap.orders)
    print(f"  h={h}: {ps}")

print("\nFirst rows of the CSV export:")
print("\n".join(cmap.to_csv().splitlines()[:4]))

null = [c for c in cmap.cells if (c.cause, c.effect) != ("JNL", "CFNAI")]
share = np.mean([c.significant_all_orders(0.95) for c in null])
print(f"\nShare of cells without a true link that still reject: {share:.3f}")
print("That is the nominal 5% at work, not a discovered channel.")
