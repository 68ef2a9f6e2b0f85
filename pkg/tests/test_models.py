import numpy as np
import pytest

import oracles
from hafvf.errors import ConfigError, InputError
from hafvf.expfam import GaussianNIW, LinRegNIG
from hafvf.filtering import HierarchyConfig
from hafvf.models import (
    SCENARIOS,
    ArConfig,
    SyntheticSpec,
    ar_fit,
    ar_hierarchy,
    ar_predict,
    ar_stats,
    generate,
    track_distribution,
)


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_generators_are_seeded(scenario):
    a = generate(SyntheticSpec(scenario, 3))
    b = generate(SyntheticSpec(scenario, 3))
    c = generate(SyntheticSpec(scenario, 4))
    np.testing.assert_array_equal(a.observations, b.observations)
    assert not np.array_equal(a.observations, c.observations)
    assert a.changes == b.changes


def test_binary_switch_layout():
    s = generate(SyntheticSpec("binary-switch", 0))
    assert s.observations.shape == (200,)
    assert set(np.unique(s.observations)) <= {0.0, 1.0}
    assert s.changes == (40, 80, 120, 160)
    many = generate(SyntheticSpec("binary-switch", 0, {"n": 20000, "period": 10000}))
    assert many.observations[:10000].mean() == pytest.approx(0.8, abs=0.02)
    assert many.observations[10000:].mean() == pytest.approx(0.2, abs=0.02)


def test_gaussian_walk_layout():
    s = generate(SyntheticSpec("gaussian-2d-walk", 0))
    assert s.observations.shape == (400, 2)
    assert s.changes == (200,)
    still = generate(SyntheticSpec("gaussian-2d-walk", 0, {"walk_sd": 0.0})).observations
    assert still[:200].mean(axis=0) == pytest.approx([-2.0, 2.0], abs=0.3)
    assert still[200:].mean(axis=0) == pytest.approx([2.0, -2.0], abs=0.3)


def test_impulses_are_added_to_the_base_signal():
    base = generate(SyntheticSpec("sinusoid-mix", 9))
    imp = generate(SyntheticSpec("impulse-artifacts", 9))
    diff = imp.observations - base.observations
    assert imp.artifacts == (100, 300)
    assert np.flatnonzero(diff).tolist() == [100, 300]
    assert diff[100] == pytest.approx(2.0)


def test_generator_errors():
    with pytest.raises(ConfigError, match="binary-switch"):
        generate(SyntheticSpec("nope"))
    with pytest.raises(ConfigError):
        generate(SyntheticSpec("binary-switch", params={"bogus": 1}))
    with pytest.raises(ConfigError):
        generate(SyntheticSpec("impulse-artifacts", params={"impulses": (500,)}))


def test_ar_stats_regressors():
    stats = ar_stats([1.0, 2.0, 3.0, 4.0], 2)
    fam = LinRegNIG(2)
    assert len(stats) == 2
    np.testing.assert_array_equal(stats[0].t, fam.suff_stats(([2.0, 1.0], 3.0)).t)
    with pytest.raises(InputError):
        ar_stats([1.0, 2.0], 2)
    with pytest.raises(InputError):
        ar_stats([1.0, np.nan, 2.0, 3.0], 1)


def test_ar_fit_without_forgetting_is_batch_regression():
    rng = np.random.default_rng(0)
    x = np.zeros(300)
    for t in range(2, 300):
        x[t] = 0.6 * x[t - 1] - 0.3 * x[t - 2] + rng.normal(0, 0.5)
    cfg = ArConfig(2, ar_hierarchy(2, prior_precision=1.0, a=1.0, b=0.1, levels=1, fixed_w=1.0))
    last = ar_fit(cfg, x)[-1]
    u = np.array([[x[t - 1], x[t - 2]] for t in range(2, 300)])
    mn, _, _, _ = oracles.linreg_batch(np.zeros(2), np.eye(2), 1.0, 0.1, u, x[2:])
    np.testing.assert_allclose(last.coef_mean, mn, rtol=1e-9)
    assert last.coef_mean == pytest.approx([0.6, -0.3], abs=0.15)
    assert last.t == 299


def test_ar_fit_smoothing_returns_every_step():
    x = generate(SyntheticSpec("sinusoid-mix", 1, {"n": 80})).observations
    cfg = ArConfig(3, ar_hierarchy(3), "forward-backward")
    steps = ar_fit(cfg, x)
    assert len(steps) == 77
    assert all(np.all(np.isfinite(s.coef_mean)) for s in steps)


def test_ar_config_validation():
    with pytest.raises(ConfigError):
        ArConfig(0, ar_hierarchy(1))
    with pytest.raises(ConfigError):
        ArConfig(2, ar_hierarchy(3))
    with pytest.raises(ConfigError):
        ArConfig(2, ar_hierarchy(2), "sideways")


def test_ar_predict_one_step_is_student_t_moments():
    fam = LinRegNIG(2)
    prec = np.array([[4.0, 1.0], [1.0, 3.0]])
    theta = fam.params([0.5, -0.2], prec, 3.0, 2.0)
    (mu, var), = ar_predict(fam, theta, [0.3, 1.2], 1)
    u = np.array([1.2, 0.3])
    assert mu == pytest.approx(u @ [0.5, -0.2], rel=1e-14)
    # Student-t variance: b / (a - 1) * (1 + u^T P^-1 u)
    assert var == pytest.approx(2.0 / 2.0 * (1 + u @ np.linalg.solve(prec, u)), rel=1e-12)


def test_ar_predict_long_horizon_matches_impulse_response():
    # with near-certain coefficients the h-step variance is sigma^2 * sum psi_j^2
    fam = LinRegNIG(2)
    coef = np.array([0.5, 0.3])
    theta = fam.params(coef, 1e12, 1e6 + 1.0, 1e6 * 0.25)
    preds = ar_predict(fam, theta, [1.0, 2.0], 6)
    psi = [1.0, coef[0]]
    for _ in range(4):
        psi.append(coef[0] * psi[-1] + coef[1] * psi[-2])
    for h, (_, var) in enumerate(preds, 1):
        assert var == pytest.approx(0.25 * sum(p * p for p in psi[:h]), rel=1e-5)
    state = [2.0, 1.0]
    for mu, _ in preds:
        nxt = coef @ state
        assert mu == pytest.approx(nxt, rel=1e-9)
        state = [nxt, state[0]]
    assert ar_predict(fam, theta, [1.0, 2.0], 0) == []
    with pytest.raises(InputError):
        ar_predict(fam, theta, [1.0], 2)


def test_track_distribution_intervals_cover_the_mean():
    fam = GaussianNIW(2)
    cfg = HierarchyConfig(fam, fam.params(0.0, 0.1, 3.0, 1.0), levels=1, fixed_w=1.0)
    xs = np.random.default_rng(2).normal([1.0, -1.0], 1.0, size=(200, 2))
    out = track_distribution(cfg, xs)
    last = out[-1]
    assert np.all(last.mean_lo < [1.0, -1.0]) and np.all(last.mean_hi > [1.0, -1.0])
    assert np.all(last.mean_hi - last.mean_lo < 0.6)
    assert last.kappa == pytest.approx(200.1)
    assert track_distribution(cfg, np.empty((0, 2))) == []
    with pytest.raises(InputError):
        track_distribution(cfg, np.ones((3, 3)))
    with pytest.raises(ConfigError):
        track_distribution(ar_hierarchy(2), xs)
