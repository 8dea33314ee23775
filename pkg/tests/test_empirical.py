"""Multi-order causality maps."""
import numpy as np
import pytest

from mhproj.empirical import CausalityCell, empirical_causality
from mhproj.errors import InsufficientDataError, InvalidSpecError, WeakInstrumentError
from mhproj.simulate import RngStream, SeriesPanel


def white_panel(seed, T=300, k=3):
    return SeriesPanel(RngStream(seed).standard_normal((T, k)), names=["a", "b", "c"][:k])


@pytest.fixture(scope="module")
def cmap():
    return empirical_causality(white_panel(1), orders=(2, 3), horizons=range(1, 5))


def test_map_shape(cmap):
    assert len(cmap.cells) == 6 * 4
    assert cmap.test_lags == (1, 2)


def test_min_p_bounds_every_order(cmap):
    for c in cmap.cells:
        assert c.min_p <= min(c.pvalues.values())
        assert c.min_p == min(c.pvalues.values())


def test_single_order_min_p_equals_p():
    m = empirical_causality(white_panel(2, k=2), orders=(2,), horizons=[1, 2])
    for c in m.cells:
        assert c.min_p == c.pvalues[2]


def test_significance_flags():
    cell = CausalityCell("a", "b", 1, {12: 0.004, 15: 0.03, 18: 0.2}, {})
    assert cell.significant(0.95) and not cell.significant_all_orders(0.95)
    assert cell.significant_all_orders(0.75)


def test_csv_layout(cmap):
    lines = cmap.to_csv().splitlines()
    assert lines[0] == ("cause,effect,h,p_order_2,p_order_3,min_p,sig_90,sig_95,sig_99,"
                        "sig_all_90,sig_all_95,sig_all_99")
    assert len(lines) == 1 + len(cmap.cells)
    assert cmap.summary().count("->") == 6


def test_lag_rules():
    panel = white_panel(3, k=2)
    by_order = empirical_causality(panel, orders=(2, 3), horizons=[1], test_lags="order")
    explicit = empirical_causality(panel, orders=(2, 3), horizons=[1], test_lags=[1])
    assert by_order.cells[0].statistics[3] != explicit.cells[0].statistics[3]
    with pytest.raises(InvalidSpecError):
        empirical_causality(panel, orders=(2,), horizons=[1], test_lags=[3])


def test_cell_errors_are_recorded(monkeypatch):
    import mhproj.empirical as emp

    original = emp.two_stage

    def flaky(y, p, h, *args, **kw):
        if h == 2:
            raise WeakInstrumentError(1e12, "test")
        return original(y, p, h, *args, **kw)

    monkeypatch.setattr(emp, "two_stage", flaky)
    m = empirical_causality(white_panel(4, k=2), orders=(2,), horizons=[1, 2])
    bad = m.get("b", "a", 2)
    assert bad.pvalues[2] is None and bad.errors[2] == "weak_instrument"
    assert m.get("b", "a", 1).pvalues[2] is not None


def test_short_sample_rejected():
    with pytest.raises(InsufficientDataError):
        empirical_causality(white_panel(5, T=40), orders=(12,), horizons=[24])


def test_white_noise_size():
    # per-order rejection rate at 5% on independent white-noise panels
    pvals = []
    for seed in range(25):
        m = empirical_causality(white_panel(100 + seed, k=2), orders=(2,), horizons=[1, 3, 6])
        pvals += [c.pvalues[2] for c in m.cells]
    rate = np.mean(np.array(pvals) < 0.05)
    assert 0.01 <= rate <= 0.11
