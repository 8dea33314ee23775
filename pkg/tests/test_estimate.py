"""Estimators checked against statsmodels and naive loop implementations."""
import numpy as np
import pytest
import statsmodels.api as sm
from hypothesis import given, strategies as st
from statsmodels.tsa.api import VAR

from mhproj.errors import (
    IndexContractError,
    InsufficientDataError,
    InvalidBandwidthError,
    InvalidHorizonError,
    InvalidSpecError,
    WeakInstrumentError,
)
from mhproj.estimate import (
    TWO_STAGE_INFEASIBLE,
    EstimatorSpec,
    fit_var_ls,
    hac_lrv,
    ls_projection,
    pope_bias_correct,
    pope_bias_correct_phi,
    rc_var_gir,
    reordered_score,
    robust_cov,
    two_stage,
    var_residuals,
)
from mhproj.model import VarParams, gir_recursion, impulse_responses
from mhproj.simulate import RngStream, SeriesPanel, simulate_var


def lagged(y, p, t):
    """Regressor row (y_t', ..., y_{t-p+1}')' at 0-based t."""
    return np.concatenate([y[t - j] for j in range(p)])


def naive_two_stage(y, p, h, row=0, intercept=True):
    """Loop oracle built on statsmodels VAR residuals."""
    T, k = y.shape
    res = VAR(y).fit(p, trend="c" if intercept else "n")
    u = np.vstack([np.zeros((p, k)), res.resid])
    rows = range(p - 1, T - h)
    Z = np.array([np.r_[lagged(u, p, t), [1.0] * intercept] for t in rows])
    X = np.array([np.r_[lagged(y, p, t), [1.0] * intercept] for t in rows])
    Y = np.array([y[t + h, row] for t in rows])
    beta = np.linalg.solve(Z.T @ X, Z.T @ Y)
    # score: order-p LS projection residual times lagged innovations
    e = Y - X @ np.linalg.lstsq(X, Y, rcond=None)[0]
    ua = u[p - 1:T - h]
    n = len(e) - p + 1
    s = np.array([np.concatenate([e[i + j] * ua[i] for j in range(p)]) for i in range(n)])
    omega = s.T @ s / n
    sig = res.resid.T @ res.resid / (T - p)
    psi = res.ma_rep(p)
    szx = np.zeros((p * k, p * k))
    for i in range(p):
        for j in range(i + 1):
            szx[i * k:(i + 1) * k, j * k:(j + 1) * k] = sig @ psi[i - j].T
    si = np.linalg.inv(szx)
    return beta[:p * k], si @ omega @ si.T, T - h - p + 1


@pytest.fixture(scope="module")
def panel():
    from mhproj.model import dgp_from_roots, named_dgp

    return simulate_var(dgp_from_roots(named_dgp("stationary")), 300, RngStream(21))


@pytest.mark.parametrize("intercept", [True, False])
def test_var_matches_statsmodels(panel, intercept):
    fit = fit_var_ls(panel, 2, intercept)
    ref = VAR(panel.data).fit(2, trend="c" if intercept else "n")
    np.testing.assert_allclose(fit.params_hat.phi, ref.coefs, atol=1e-10)
    np.testing.assert_allclose(fit.residuals, ref.resid, atol=1e-10)
    np.testing.assert_allclose(fit.params_hat.sigma_u, ref.resid.T @ ref.resid / (panel.T - 2), atol=1e-10)
    if intercept:
        np.testing.assert_allclose(fit.params_hat.intercept, ref.intercept, atol=1e-10)


def test_var_residuals_roundtrip(panel):
    fit = fit_var_ls(panel, 2)
    np.testing.assert_allclose(var_residuals(fit.params_hat, panel), fit.residuals, atol=1e-12)


@pytest.mark.parametrize("h,bw", [(1, 1), (4, 4), (6, 7), (3, 0)])
def test_ls_projection_matches_statsmodels_hac(panel, h, bw):
    fit = ls_projection(panel, 2, h, bandwidth=bw)
    y = panel.data
    rows = range(1, panel.T - h)
    X = np.array([np.r_[lagged(y, 2, t), 1.0] for t in rows])
    Y = np.array([y[t + h, 0] for t in rows])
    ref = sm.OLS(Y, X).fit(cov_type="HAC", cov_kwds={"maxlags": bw, "use_correction": False})
    np.testing.assert_allclose(fit.beta_hat, ref.params[:4], atol=1e-10)
    np.testing.assert_allclose(fit.se, ref.bse[:4], rtol=1e-8)


@pytest.mark.parametrize("h", [1, 3, 8])
def test_two_stage_matches_loop_oracle(panel, h):
    fit = two_stage(panel, 2, h)
    beta, cov, t_bar = naive_two_stage(panel.data, 2, h)
    assert fit.t_bar == t_bar
    np.testing.assert_allclose(fit.beta_hat, beta, atol=1e-10)
    np.testing.assert_allclose(fit.cov_hat, cov, rtol=1e-8, atol=1e-10)


def test_two_stage_without_intercept(panel):
    fit = two_stage(panel, 2, 3, intercept=False)
    beta, cov, _ = naive_two_stage(panel.data, 2, 3, intercept=False)
    np.testing.assert_allclose(fit.beta_hat, beta, atol=1e-10)
    np.testing.assert_allclose(fit.cov_hat, cov, rtol=1e-8, atol=1e-10)


def test_lag_augmentation_shapes(panel):
    fit = two_stage(panel, 2, 4, delta=2)
    assert fit.beta_hat.shape == (4,) and fit.gamma_hat.shape == (4,)
    assert fit.cov_hat.shape == (4, 4)


def test_infeasible_uses_given_innovations(table1_params):
    from mhproj.simulate import draw_innovations, var_recursion

    u = draw_innovations(table1_params.sigma_u, (300, 2), RngStream(4))
    y = var_recursion(table1_params.phi, None, u)
    fit = two_stage(y, 2, 3, u=u)
    assert fit.method == TWO_STAGE_INFEASIBLE
    with pytest.raises(IndexContractError):
        two_stage(y, 2, 3, u=u[:-1])


def test_rc_point_is_gir_of_estimate(panel):
    var = fit_var_ls(panel, 2)
    fit = rc_var_gir(var, 5)
    np.testing.assert_allclose(fit.beta_hat, gir_recursion(var.params_hat, 5)[-1].beta(0), atol=1e-12)


def test_rc_delta_method_matches_finite_differences(panel):
    var = fit_var_ls(panel, 2)
    h, p, k = 4, 2, 2
    a = np.concatenate(list(var.params_hat.phi), axis=1)  # k x pk

    def point(av):
        phi = np.stack([av[:, j * k:(j + 1) * k] for j in range(p)])
        return gir_recursion(VarParams(phi, np.eye(k)), h)[-1].beta(0)

    eps = 1e-6
    jac = np.zeros((p * k, a.size))
    for idx in range(a.size):
        d = np.zeros(a.size)
        d[idx] = eps
        jac[:, idx] = (point(a + d.reshape(a.shape)) - point(a - d.reshape(a.shape))) / (2 * eps)
    cov_vec = np.kron(var.params_hat.sigma_u, var.xtx_inv[:p * k, :p * k])
    fit = rc_var_gir(var, h)
    np.testing.assert_allclose(fit.cov_hat / fit.t_bar, jac @ cov_vec @ jac.T, rtol=1e-5, atol=1e-10)


def test_pope_scalar_ar1_matches_textbook():
    # scalar AR(1) with intercept: E[a_hat] - a = -(1 + 3a) / T
    a, n = 0.5, 200
    corrected = pope_bias_correct_phi(np.array([[[a]]]), np.array([[1.0]]), n)
    assert corrected[0, 0, 0] == pytest.approx(a + (1 + 3 * a) / n, rel=1e-10)


def test_pope_shrinks_to_stationarity():
    phi = np.array([[[0.995]]])
    corrected = pope_bias_correct_phi(phi, np.array([[1.0]]), 50)
    assert abs(corrected[0, 0, 0]) < 1.0


def test_pope_flags_unstable_fit(i1_params):
    y = simulate_var(VarParams(np.array([[[1.02]]]), [[1.0]]), 200, RngStream(3))
    fit = pope_bias_correct(fit_var_ls(y, 1))
    assert fit.unstable and not fit.bias_corrected


def test_pope_recomputes_residuals(panel):
    fit = fit_var_ls(panel, 2)
    bc = pope_bias_correct(fit)
    assert bc.bias_corrected
    np.testing.assert_allclose(bc.residuals, var_residuals(bc.params_hat, panel))


def test_reordered_score_layout():
    e = np.array([1.0, 2.0, 3.0, 4.0])
    u = np.array([[1.0, 10.0], [2.0, 20.0], [3.0, 30.0], [4.0, 40.0]])
    s = reordered_score(e, u, 2).s_star
    np.testing.assert_allclose(s[0], [1.0, 10.0, 2.0, 20.0])
    np.testing.assert_allclose(s[2], [9.0, 90.0, 12.0, 120.0])
    with pytest.raises(IndexContractError):
        reordered_score(e, u[:3], 2)


@given(seed=st.integers(0, 10_000), h=st.integers(1, 10))
def test_sample_omega_s_is_psd(seed, h):
    rng = np.random.default_rng(seed)
    s = reordered_score(rng.normal(size=60), rng.normal(size=(60, 3)), 2, h)
    assert np.linalg.eigvalsh(s.omega_s).min() > -1e-10


def test_robust_cov_matches_fit(panel):
    fit = two_stage(panel, 2, 3)
    var = fit_var_ls(panel, 2)
    u = np.vstack([np.zeros((2, 2)), var.residuals])[1:1 + fit.t_bar]
    cov = robust_cov(reordered_score(fit.resid_proj, u, 2), var.params_hat)
    np.testing.assert_allclose(cov, fit.cov_hat, rtol=1e-10)


def test_hac_bandwidth_zero_is_outer_product():
    g = np.random.default_rng(0).normal(size=(50, 2))
    np.testing.assert_allclose(hac_lrv(g, 0), g.T @ g / 50)
    with pytest.raises(InvalidBandwidthError):
        hac_lrv(g, 50)


@given(seed=st.integers(0, 1000), h=st.integers(1, 6),
       method=st.sampled_from(["2s", "ls", "rc"]))
def test_batched_equals_single(seed, h, method):
    from mhproj.model import dgp_from_roots, named_dgp

    prm = dgp_from_roots(named_dgp("stationary"))
    ys = np.stack([simulate_var(prm, 80, RngStream(seed, i)).data for i in range(3)])
    spec = EstimatorSpec(method, 2, h)
    beta, cov, ok = spec.fit_batch(ys)
    assert ok.all()
    for i in range(3):
        f = spec.fit(ys[i])
        np.testing.assert_allclose(beta[i], f.beta_hat, atol=1e-10)
        np.testing.assert_allclose(cov[i], f.cov_hat, rtol=1e-7, atol=1e-10)


def test_ma_residual_cutoff_large_sample(table1_params):
    # LS projection residuals are MA(h-1): no autocorrelation at lags >= h
    h = 4
    y = simulate_var(table1_params, 100_000, RngStream(5))
    e = ls_projection(y, 2, h).resid_proj
    e = e - e.mean()
    ac = np.array([np.mean(e[m:] * e[:len(e) - m]) for m in range(h + 3)]) / e.var()
    assert abs(ac[h - 1]) > 0.05
    assert np.abs(ac[h:]).max() < 0.02


def test_weak_instruments_rejected():
    # a constant-plus-trend series leaves no innovation variation to instrument with
    y = np.column_stack([np.arange(60.0), np.arange(60.0) ** 1.5])
    with pytest.raises((WeakInstrumentError, InsufficientDataError, ArithmeticError)):
        two_stage(SeriesPanel(y + 1e-13 * np.random.default_rng(0).normal(size=y.shape)), 1, 2)


def test_guards(panel):
    with pytest.raises(InvalidHorizonError):
        two_stage(panel, 2, 0)
    with pytest.raises(InvalidSpecError):
        two_stage(panel, 2, 1, delta=3)
    with pytest.raises(InsufficientDataError):
        two_stage(panel.data[:12], 2, 8)
    with pytest.raises(InvalidSpecError):
        EstimatorSpec("ols", 2, 1)


def test_augmentation_warning(panel):
    with pytest.warns(RuntimeWarning, match="exceeds 0.2"):
        fit = two_stage(panel.data[:100], 2, 10, delta=1)
    assert fit.diagnostics


def test_coef_index():
    from mhproj.estimate import ProjectionFit

    f = ProjectionFit("x", 1, 2, 3, np.zeros(6), np.eye(6), 10)
    assert f.coef_index(2, 1) == 4
    with pytest.raises(IndexContractError):
        f.coef_index(3, 0)


def test_impulse_of_estimate_is_finite(panel):
    assert np.all(np.isfinite(impulse_responses(fit_var_ls(panel, 2).params_hat, 40)))
