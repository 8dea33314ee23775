"""Monte Carlo harness, report layout and the efficiency grid."""
import math

import numpy as np
import pytest

from mhproj.errors import ConfigError, InvalidSpecError
from mhproj.estimate import ls_proj_core, two_stage_core
from mhproj.experiments import (
    McCell,
    McSummary,
    MethodSpec,
    Target,
    _ar2_projection_pair,
    compare_methods_report,
    config_from_dict,
    efficiency_category,
    efficiency_grid,
    efficiency_table,
    load_config,
    run_mc,
    simulate_ar2_batch,
)
from mhproj.simulate import RngStream

BASE = {"dgp": "stationary", "T": 120, "replications": 120, "horizons": [1, 4],
        "methods": ["RC-VAR", "LS-Proj", "2S(0)"], "targets": ["phi_12_1", "phi_12_2"]}


def test_method_and_target_parsing():
    assert MethodSpec.parse("2S(1)_b") == MethodSpec("2S(1)_b", "2s", 1, True)
    assert MethodSpec.parse("ls-proj").name == "LS-Proj"
    with pytest.raises(ConfigError):
        MethodSpec.parse("LS-Proj_b")
    t = Target.parse("phi_12_2")
    assert (t.row, t.col, t.lag) == (0, 1, 2) and t.index(2) == 3
    assert Target.parse({"row": 0, "col": 1, "lag": 1}).label == "phi_12_1"


def test_config_validation():
    with pytest.raises(ConfigError):
        config_from_dict({**BASE, "replications": 0})
    with pytest.raises(ConfigError):
        config_from_dict({**BASE, "colour": "red"})
    with pytest.raises(ConfigError):
        config_from_dict({**BASE, "T": 5})
    with pytest.raises(ConfigError):
        config_from_dict({**BASE, "targets": ["phi_13_1"]})
    with pytest.raises(ConfigError):
        config_from_dict({**BASE, "dgp": {"name": "stationary", "sigma": 1}})


def test_yaml_config(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("dgp:\n  name: i1\nT: 100\nreplications: 5\nhorizons: [1, 2]\n"
                    "methods: [2S(1)]\ntargets: [phi_12_1]\nmaster_seed: 3\n")
    cfg = load_config(path, master_seed=9)
    assert cfg.dgp_name == "i1" and cfg.master_seed == 9 and cfg.methods[0].delta == 1


@pytest.mark.parametrize("workers", [2, 4])
def test_determinism_across_workers(workers):
    cfg = config_from_dict(BASE)
    assert run_mc(cfg, workers=1).to_rows() == run_mc(cfg, workers=workers).to_rows()


def test_summary_invariants():
    s = run_mc(config_from_dict(BASE))
    for c in s.cells:
        assert c.rmse >= abs(c.bias)
        assert 0 <= c.coverage <= 1 and 0 <= c.empirical_size <= 1
        assert c.empirical_size == pytest.approx(1 - c.coverage)
        assert c.n_failed == 0 and not c.flagged


def test_true_values_from_gir():
    s = run_mc(config_from_dict({**BASE, "replications": 2}))
    assert s.cell("2S(0)", "phi_12_1", 1).true_value == pytest.approx(-0.2)
    assert s.cell("2S(0)", "phi_12_2", 1).true_value == pytest.approx(0.08)


def test_white_noise_rc_bias_machine_scale():
    cfg = config_from_dict({**BASE, "dgp": "white_noise", "horizons": [36], "T": 250,
                            "replications": 50, "methods": ["RC-VAR"]})
    for c in run_mc(cfg).cells:
        assert c.true_value == 0.0
        assert abs(c.bias) < 1e-10


def test_rmse_falls_with_sample_size():
    horizons = [1, 3, 6, 12]
    cfg = dict(BASE, replications=500, horizons=horizons)
    small = run_mc(config_from_dict({**cfg, "T": 250}))
    large = run_mc(config_from_dict({**cfg, "T": 1000}))
    for a, b in zip(small.cells, large.cells):
        assert b.rmse < a.rmse, (a.method, a.target, a.horizon)


def test_report_single_cell():
    cell = McCell("2S(0)", "phi_12_1", 1, -0.2, 0.01, 0.05, 0.05, 0.95, 0.3, 0, 10)
    csv_text, text = compare_methods_report(McSummary([cell]))
    lines = csv_text.strip().splitlines()
    assert lines[0] == "target,panel,method,h=1"
    assert len(lines) == 1 + 1 + 5
    assert "-0.200" in text


def test_report_layout_order():
    s = run_mc(config_from_dict({**BASE, "replications": 3}))
    _, text = compare_methods_report(s)
    blocks = [l for l in text.splitlines() if l.startswith("--")]
    assert blocks[:5] == ["-- Bias", "-- RMSE", "-- Size", "-- Coverage", "-- Width"]
    rows = [l.split()[0] for l in text.splitlines()[4:7]]
    assert rows == ["RC-VAR", "LS-Proj", "2S(0)"]


def test_report_errors():
    with pytest.raises(InvalidSpecError):
        compare_methods_report(McSummary([]))
    nan = math.nan
    dead = McCell("2S(0)", "phi_12_1", 1, 0.1, nan, nan, nan, nan, nan, 10, 10, True)
    with pytest.raises(InvalidSpecError, match="failed"):
        compare_methods_report(McSummary([dead]))


def test_efficiency_categories():
    assert efficiency_category(1.0) == "ls_better"
    assert efficiency_category(0.95) == "2s_0_10"
    assert efficiency_category(0.9) == "2s_10_30"
    assert efficiency_category(0.7) == "2s_30plus"


def test_white_noise_ratio_one():
    cells = efficiency_grid([0.0], [0.0], range(1, 7))
    assert all(c.ratio == pytest.approx(1.0, abs=1e-12) for c in cells)


def test_h1_least_squares_efficient():
    cells = efficiency_grid((0.8, 0.5, 0.2, -0.5), (0.01, 0.99, 0.07), [1])
    assert all(c.sd_ls <= c.sd_2s + 1e-9 for c in cells)


def test_efficiency_spot_cell_directions():
    for c in efficiency_grid([0.2], [0.5], [1]):
        assert c.sd_ls <= c.sd_2s
    cells = efficiency_grid([0.5], [0.5], [12])
    assert all(c.sd_2s < c.sd_ls for c in cells)


def test_explosive_cells_skipped():
    cells = efficiency_grid([0.5], [1.0], [1, 2])
    assert all(c.category == "skipped" and c.skipped for c in cells)
    assert "skipped" in efficiency_table(cells)


def test_ar2_fast_path_matches_cores():
    y = simulate_ar2_batch(0.6, -0.3, 400, 3, RngStream(5))
    for h in (1, 7):
        ls, two = _ar2_projection_pair(y[..., 0], h)
        np.testing.assert_allclose(ls, ls_proj_core(y, 2, h, intercept=False, point_only=True)["beta"],
                                   atol=1e-12)
        np.testing.assert_allclose(two, two_stage_core(y, 2, h, intercept=False, point_only=True)["beta"],
                                   atol=1e-12)
