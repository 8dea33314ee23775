"""Wald tests, intervals, bootstrap and Monte Carlo tests."""
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from mhproj.errors import InvalidRestrictionError, InvalidSpecError, UnstableBootstrapError
from mhproj.estimate import EstimatorSpec, two_stage
from mhproj.infer import (
    LinearRestriction,
    bootstrap_pivots,
    bootstrap_ti,
    causality_restriction,
    ci_by_test_inversion,
    coefficient_restriction,
    lmc_test,
    mc_pvalue,
    mmc_grid,
    mmc_test,
    percentile_t_interval,
    supt_band,
    supt_critical_value,
    wald_causality,
    wald_test,
    z_interval,
)
from mhproj.model import dgp_from_roots, named_dgp
from mhproj.simulate import RngStream, simulate_var


@pytest.fixture(scope="module")
def panel():
    return simulate_var(dgp_from_roots(named_dgp("stationary")), 250, RngStream(33))


@pytest.fixture(scope="module")
def fit(panel):
    return two_stage(panel, 2, 3)


def test_single_restriction_is_squared_t(fit):
    res = wald_test(fit, coefficient_restriction(4, 1, 0.0))
    t = fit.beta_hat[1] / fit.se[1]
    assert res.statistic == pytest.approx(t ** 2, rel=1e-12)
    assert res.p_value == pytest.approx(2 * stats.norm.sf(abs(t)), rel=1e-9)


def test_causality_restriction_layout():
    r = causality_restriction(3, 2, 1, [1, 3])
    want = np.zeros((2, 6))
    want[0, 1] = want[1, 5] = 1.0
    np.testing.assert_array_equal(r.R, want)
    with pytest.raises(InvalidRestrictionError):
        causality_restriction(3, 2, 1, [4])
    with pytest.raises(InvalidRestrictionError):
        causality_restriction(3, 2, 2, [1])


def test_restriction_validation():
    with pytest.raises(InvalidRestrictionError):
        LinearRestriction([[1, 0], [2, 0]], [0, 0])
    with pytest.raises(InvalidRestrictionError):
        LinearRestriction([[1, 0]], [0, 0])
    with pytest.raises(InvalidRestrictionError):
        coefficient_restriction(4, 0).check(6)


def test_wald_causality_df(fit):
    res = wald_causality(fit, 1)
    assert res.df == 2
    assert res.p_value == pytest.approx(stats.chi2.sf(res.statistic, 2))


@given(scale=st.floats(0.01, 100.0), seed=st.integers(0, 50))
def test_wald_scale_invariance(scale, seed):
    # rescaling the causing series rescales its coefficients but leaves the test unchanged
    y = simulate_var(dgp_from_roots(named_dgp("stationary")), 150, RngStream(seed)).data
    base = wald_causality(two_stage(y, 2, 4), 1).statistic
    y2 = y * np.array([1.0, scale])
    scaled = wald_causality(two_stage(y2, 2, 4), 1).statistic
    assert scaled == pytest.approx(base, rel=1e-6)


def test_z_interval(fit):
    ci = z_interval(fit, 0, 0.9)
    half = stats.norm.ppf(0.95) * fit.se[0]
    assert ci.lower == pytest.approx(fit.beta_hat[0] - half)
    assert ci.upper == pytest.approx(fit.beta_hat[0] + half)
    assert isinstance(ci.lower, float)


def test_percentile_t_formula():
    piv = np.linspace(-2, 3, 1001)
    lo, hi = percentile_t_interval(1.0, 0.5, piv, 0.9)
    q = np.quantile(piv, [0.05, 0.95])
    assert lo == pytest.approx(1.0 - q[1] * 0.5)
    assert hi == pytest.approx(1.0 - q[0] * 0.5)


@given(n=st.integers(1, 60), obs=st.floats(-3, 3), seed=st.integers(0, 100))
def test_mc_pvalue_lattice(n, obs, seed):
    sims = np.round(np.random.default_rng(seed).normal(size=n), 1)
    p = mc_pvalue(obs, sims)
    assert (n + 1) * p == pytest.approx(round((n + 1) * p))
    assert 1.0 / (n + 1) <= p <= 1.0
    assert p == (1 + np.sum(sims >= obs)) / (n + 1)


def test_mc_pvalue_ties_count():
    assert mc_pvalue(1.0, [1.0, 1.0, 0.0, 2.0]) == pytest.approx(4 / 5)


def test_bootstrap_is_deterministic_across_threads(panel):
    spec = EstimatorSpec("2s", 2, 3)
    a = bootstrap_pivots(panel, spec, np.eye(4)[:2], 200, RngStream(5), threads=1)
    b = bootstrap_pivots(panel, spec, np.eye(4)[:2], 200, RngStream(5), threads=3)
    np.testing.assert_array_equal(a.pivots, b.pivots)
    assert a.pivots.shape == (200, 2)


def test_bootstrap_interval_brackets_estimate(panel):
    spec = EstimatorSpec("2s", 2, 3)
    ci = bootstrap_ti(panel, spec, np.eye(4)[1], B=300, rng=RngStream(2))
    assert ci.lower < ci.estimate < ci.upper
    z = z_interval(spec.fit(panel), 1)
    assert 0.5 < ci.width / z.width < 2.0


def test_bootstrap_rejects_small_B(panel):
    with pytest.raises(InvalidSpecError):
        bootstrap_pivots(panel, EstimatorSpec("2s", 2, 3), np.eye(4)[0], 50, RngStream(0))


def test_bootstrap_failure_threshold(panel, monkeypatch):
    import mhproj.infer as inf

    def broken(ids, *args):
        piv, ok = original(ids, *args)
        return piv, np.zeros_like(ok)

    original = inf._boot_chunk
    monkeypatch.setattr(inf, "_boot_chunk", broken)
    with pytest.raises(UnstableBootstrapError):
        bootstrap_pivots(panel, EstimatorSpec("2s", 2, 3), np.eye(4)[0], 100, RngStream(0))


def test_supt_wider_than_pointwise():
    rng = np.random.default_rng(0)
    piv = rng.normal(size=(2000, 5))
    band = supt_band(piv, np.zeros(5), np.ones(5), 0.95)
    assert band[0].upper > stats.norm.ppf(0.975)
    # one coefficient: the sup-t value is the |pivot| quantile
    assert supt_critical_value(piv[:, :1], 0.95) == pytest.approx(np.quantile(np.abs(piv[:, 0]), 0.95))
    with pytest.raises(InvalidSpecError):
        supt_critical_value(piv[:50], 0.95)


def test_mmc_grid_contains_centre():
    g = mmc_grid(np.zeros(3), np.ones(3), np.array([0, 2]), 2.0, 3)
    assert g.shape == (10, 3)
    np.testing.assert_array_equal(g[0], np.zeros(3))
    assert np.all(g[:, 1] == 0)


def test_lmc_pvalue_on_lattice(panel):
    spec = EstimatorSpec("2s", 2, 3)
    res = lmc_test(panel, causality_restriction(2, 2, 1, [1, 2]), spec, N=39, rng=RngStream(4))
    assert res.draws.shape == (39,)
    assert 40 * res.p_value == pytest.approx(round(40 * res.p_value))


def test_mmc_dominates_lmc(panel):
    spec = EstimatorSpec("2s", 2, 3)
    rest = coefficient_restriction(4, 1, -0.4)
    lmc = lmc_test(panel, rest, spec, N=39, rng=RngStream(8))
    mmc = mmc_test(panel, rest, spec, N=39, rng=RngStream(8), resolution=2)
    assert mmc.p_value >= lmc.p_value
    assert mmc.grid_pvalues[0] == lmc.p_value


def test_mmc_grid_must_satisfy_null(panel):
    spec = EstimatorSpec("2s", 2, 3)
    with pytest.raises(InvalidRestrictionError):
        mmc_test(panel, coefficient_restriction(4, 1, 0.0), spec, N=19, grid=np.ones((1, 4)))


def test_lmc_size_under_null():
    # rejection frequency at the true coefficient stays near the nominal level
    prm = dgp_from_roots(named_dgp("stationary"))
    spec = EstimatorSpec("2s", 2, 2)
    from mhproj.model import gir_recursion

    truth = gir_recursion(prm, 2)[-1].beta(0)
    rest = coefficient_restriction(4, 1, float(truth[1]))
    rejections = [lmc_test(simulate_var(prm, 200, RngStream(100, r)), rest, spec, N=19,
                           rng=RngStream(200, r)).p_value <= 0.1 for r in range(60)]
    assert np.mean(rejections) < 0.25


def test_ci_by_inversion(panel):
    spec = EstimatorSpec("2s", 2, 3)
    fit = spec.fit(panel)
    est, se = fit.beta_hat[1], fit.se[1]
    ci = ci_by_test_inversion(panel, 1, (est - 4 * se, est + 4 * se, se / 2), spec, N=39,
                              rng=RngStream(1), level=0.9)
    assert ci.lower <= est <= ci.upper
    assert ci.lower > est - 4 * se and ci.upper < est + 4 * se


def test_mc_tests_require_two_stage(panel):
    with pytest.raises(InvalidSpecError):
        lmc_test(panel, coefficient_restriction(4, 0), EstimatorSpec("ls", 2, 3), N=19)

