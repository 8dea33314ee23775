"""A small Monte Carlo comparison of VAR, LS projection and two-stage projection."""
import time

from mhproj import run_mc
from mhproj.experiments import compare_methods_report, config_from_dict

print("Stationary design, T=250, 300 replications, 95% intervals.")
print("Size tests H0: coefficient equals its true value.\n")

cfg = config_from_dict({
    "dgp": "stationary",
    "T": 250,
    "replications": 300,
    "horizons": [1, 6, 12, 24],
    "methods": ["RC-VAR", "LS-Proj", "2S(0)", "2S(1)"],
    "targets": ["phi_12_1"],
    "master_seed": 42,
})
start = time.perf_counter()
summary = run_mc(cfg)
_, text = compare_methods_report(summary)
print(text)
print(f"({time.perf_counter() - start:.1f}s)")

print("\nThings to look for: the LS projection loses coverage as h grows,")
print("and the two-stage intervals stay close to 95% while being narrower than LS beyond h=1.")
print("RC-VAR intervals are the tightest but undercover at long horizons.")
