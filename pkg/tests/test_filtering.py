import math

import numpy as np
import pytest

import oracles
from hafvf.errors import ConfigError, DomainError, InputError
from hafvf.expfam import BernoulliBeta, GaussianNIG, GaussianNIW, LinRegNIG, NaturalParams, weighted_prior
from hafvf.filtering import (
    HierarchyConfig,
    combine,
    effective_memory,
    init,
    run,
    smooth,
    stats_for,
    step,
)
from hafvf.forgetting import BetaParams

BERN = BernoulliBeta()


def _pinned(fam, theta_0):
    return HierarchyConfig(fam, theta_0, levels=1, fixed_w=1.0)


def _final(config, stats):
    return run(config, stats)[-1][0].theta


def test_conjugate_limit_bernoulli():
    xs = np.random.default_rng(0).integers(0, 2, 300).astype(float)
    theta = _final(_pinned(BERN, BERN.params(0.5, 2.0)), stats_for(BERN, xs))
    a, b = BERN.pseudo_counts(theta)
    assert (a, b) == pytest.approx(oracles.beta_batch(0.5, 2.0, xs), rel=1e-12)


def test_conjugate_limit_nig():
    fam = GaussianNIG(2)
    xs = np.random.default_rng(1).normal([1.0, -2.0], [0.5, 2.0], size=(300, 2))
    theta = _final(_pinned(fam, fam.params([0.1, 0.2], 0.5, 2.0, 1.5)), stats_for(fam, xs))
    st = fam.standard(theta)
    mu, k, a, b = oracles.nig_batch(np.array([0.1, 0.2]), 0.5, 2.0, 1.5, xs)
    np.testing.assert_allclose(st["mu"], mu, rtol=1e-10)
    assert st["kappa"] == pytest.approx(k, rel=1e-12)
    assert st["a"] == pytest.approx(a, rel=1e-12)
    np.testing.assert_allclose(st["b"], b, rtol=1e-9)


def test_conjugate_limit_niw():
    fam = GaussianNIW(2)
    xs = np.random.default_rng(2).multivariate_normal([1.0, 0.0], [[1.0, 0.5], [0.5, 2.0]], size=300)
    scale0 = np.array([[2.0, 0.1], [0.1, 1.0]])
    theta = _final(_pinned(fam, fam.params([0.0, 1.0], 0.3, 4.0, scale0)), stats_for(fam, xs))
    st = fam.standard(theta)
    mu, k, nu, scale = oracles.niw_batch(np.array([0.0, 1.0]), 0.3, 4.0, scale0, xs)
    np.testing.assert_allclose(st["mu"], mu, rtol=1e-10)
    assert (st["kappa"], st["dof"]) == pytest.approx((k, nu), rel=1e-12)
    np.testing.assert_allclose(st["scale"], scale, rtol=1e-9)


def test_conjugate_limit_linreg():
    fam = LinRegNIG(3)
    rng = np.random.default_rng(3)
    u = rng.normal(size=(300, 3))
    y = u @ np.array([0.5, -1.0, 2.0]) + rng.normal(0, 0.3, 300)
    p0 = np.diag([1.0, 2.0, 0.5])
    m0 = np.array([0.1, 0.0, -0.1])
    theta = _final(_pinned(fam, fam.params(m0, p0, 1.5, 0.7)), stats_for(fam, list(zip(u, y))))
    st = fam.standard(theta)
    mn, pn, an, bn = oracles.linreg_batch(m0, p0, 1.5, 0.7, u, y)
    np.testing.assert_allclose(st["mean"], mn, rtol=1e-9)
    np.testing.assert_allclose(st["precision"], pn, rtol=1e-12)
    assert (st["a"], st["b"]) == pytest.approx((an, bn), rel=1e-9)


def test_memory_asymptote_fixed_w():
    theta_0 = BERN.params(0.5, 0.5)
    cfg = HierarchyConfig(BERN, theta_0, levels=1, fixed_w=0.8)
    out = run(cfg, stats_for(BERN, np.ones(100)))
    assert abs(out[-1][0].theta.eta - 6.0) < 1e-6
    assert effective_memory(out[-1][0], cfg) == pytest.approx((6.0, 6.0), abs=1e-6)
    assert out[-1][1].eta_asymptote == pytest.approx(6.0)


def test_forgetting_only_step():
    cfg = HierarchyConfig(BERN, BERN.params(1.0, 1.0))
    state = run(cfg, stats_for(BERN, [1, 1, 1, 0, 1]))[-1][0]
    new, diag = step(state, None, cfg)
    expected = weighted_prior(state.theta, cfg.theta_0, cfg.phi_0.mix(cfg.phi_0, 1.0).mean)
    assert new.t == state.t + 1
    assert new.phi == state.phi and new.beta == state.beta
    assert new.theta.eta < state.theta.eta
    assert diag.log_pred == 0.0 and diag.converged
    assert expected.eta >= cfg.theta_0.eta


def test_log_pred_uses_predicted_prior():
    cfg = HierarchyConfig(BERN, BERN.params(1.0, 1.0), levels=1, fixed_w=0.7)
    state = run(cfg, stats_for(BERN, [1, 1, 0]))[-1][0]
    _, diag = step(state, BERN.suff_stats(1), cfg)
    hat = weighted_prior(state.theta, cfg.theta_0, 0.7)
    assert diag.log_pred == pytest.approx(BERN.log_predictive(hat, 1), rel=1e-14)


@pytest.mark.parametrize("levels", [2, 3])
def test_surprise_lowers_memory(levels):
    cfg = HierarchyConfig(BERN, BERN.params(1.0, 1.0), BetaParams(9.0, 1.0), levels=levels, gamma=0.99)
    state = run(cfg, stats_for(BERN, np.ones(40)))[-1][0]
    s_same, d_same = step(state, BERN.suff_stats(1), cfg)
    s_odd, d_odd = step(state, BERN.suff_stats(0), cfg)
    assert d_odd.e_w < d_same.e_w
    assert math.isfinite(d_odd.elbo) and math.isfinite(d_same.elbo)
    assert d_same.converged and d_odd.converged


def test_three_level_diagnostics():
    cfg = HierarchyConfig(BERN, BERN.params(1.0, 1.0), BetaParams(0.9, 0.1), BetaParams(0.75, 0.25), gamma=0.999)
    xs = np.random.default_rng(4).integers(0, 2, 60).astype(float)
    out = run(cfg, stats_for(BERN, xs))
    for state, diag in out:
        assert 0.0 < diag.e_w < 1.0 and 0.0 < diag.e_b < 1.0
        assert diag.var_w > 0.0
        assert state.theta.eta > 0.0


def test_determinism():
    cfg = HierarchyConfig(GaussianNIG(1), GaussianNIG(1).params(0.0, 1.0, 1.0, 1.0))
    xs = np.random.default_rng(5).normal(size=(50, 1))
    a = run(cfg, stats_for(cfg.family, xs))
    b = run(cfg, stats_for(cfg.family, xs))
    for (sa, da), (sb, db) in zip(a, b):
        np.testing.assert_array_equal(sa.theta.xi, sb.theta.xi)
        assert sa.phi == sb.phi and da.elbo == db.elbo


def test_single_observation_smoothing_is_exact():
    cfg = HierarchyConfig(BERN, BERN.params(1.0, 1.0))
    res = smooth(cfg, stats_for(BERN, [1.0]))
    np.testing.assert_array_equal(res.combined[0].xi, res.forward[0][0].theta.xi)
    assert res.combined[0].eta == res.forward[0][0].theta.eta


def test_stationary_smoothing_equals_batch():
    fam = GaussianNIG(1)
    theta_0 = fam.params(0.0, 1.0, 1.0, 1.0)
    xs = np.random.default_rng(6).normal(2.0, 1.0, size=(40, 1))
    res = smooth(_pinned(fam, theta_0), stats_for(fam, xs))
    mu, k, a, b = oracles.nig_batch(np.zeros(1), 1.0, 1.0, 1.0, xs)
    for theta in res.combined:
        st = fam.standard(theta)
        assert st["kappa"] == pytest.approx(k, rel=1e-12)
        np.testing.assert_allclose(st["mu"], mu, rtol=1e-10)
        np.testing.assert_allclose(st["b"], b, rtol=1e-9)


def test_combine_window_and_fallback():
    t0 = BERN.params(1.0, 1.0)
    fwd = BERN.params(5.0, 3.0)
    bwd = BERN.params(30.0, 12.0)
    stats = BERN.suff_stats(1)
    full, bad = combine(BERN, fwd, bwd, stats, t0)
    capped, _ = combine(BERN, fwd, bwd, stats, t0, window=5.0)
    assert not bad
    assert full.eta == pytest.approx(fwd.eta + bwd.eta - 1 - t0.eta)
    assert capped.eta == pytest.approx(fwd.eta + 5.0)
    broken, bad = combine(BERN, BERN.params(1.5, 1.5), NaturalParams([0.1], 2.3), stats, t0)
    assert bad and broken is t0


def test_config_validation():
    t0 = BERN.params(1.0, 1.0)
    for kw in ({"levels": 4}, {"gamma": 1.5}, {"fixed_w": -0.1}, {"fixed_b": 2.0}, {"sweep_tol": 0.0}, {"fb_window": 0.0}):
        with pytest.raises(ConfigError):
            HierarchyConfig(BERN, t0, **kw)
    with pytest.raises(ConfigError):
        HierarchyConfig(BERN, NaturalParams([2.0], 1.0))


def test_errors_name_the_observation():
    fam = GaussianNIG(1)
    cfg = HierarchyConfig(fam, fam.params())
    with pytest.raises(ConfigError):
        smooth(cfg, [fam.suff_stats([1.0]), None])
    bad = stats_for(fam, [[1.0], [2.0]]) + [BERN.suff_stats(1)]
    with pytest.raises(InputError, match="observation 2"):
        run(cfg, bad)


def test_init_state():
    cfg = HierarchyConfig(BERN, BERN.params(2.0, 1.0), BetaParams(3.0, 1.0))
    s = init(cfg)
    assert s.t == 0 and s.phi == BetaParams(3.0, 1.0) and s.theta is cfg.theta_0


def test_domain_error_type_is_preserved():
    assert issubclass(DomainError, ValueError)
