import math

import numpy as np
import pytest

import lassomc


def test_lasso_null_weights():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(40, 6))
    y = x[:, 0] - 0.5 * x[:, 3] + 0.1 * rng.normal(size=40)
    lmax = lassomc.lambda_max(x - x.mean(0), y - y.mean())
    assert lassomc.fit(x, y, lmax * (1 + 1e-12)).nonzeros == 0
    model = lassomc.fit(x, y, 0.01 * lmax)
    assert model.nonzeros >= 2
    assert np.abs(model.predict(x) - y).max() < 0.5


def test_two_level_matches_numpy():
    f = np.array([1.0, 2.0, 4.0, 7.0, 11.0, 16.0])
    s = np.array([1.5, 1.5, 4.5, 6.0, 12.0, 15.0])
    w = np.linspace(0.0, 20.0, 50)
    assert lassomc.two_level_mean(f, s, w) == pytest.approx(w.mean() + f.mean() - s.mean())
    assert lassomc.two_level_variance(f, s, w) == pytest.approx(
        np.var(w, ddof=1) + np.var(f, ddof=1) - np.var(s, ddof=1)
    )
    mse_mean, mse_var = lassomc.estimate_mse(f, s, 100)
    assert mse_mean == pytest.approx(0.4363611111111111)
    assert mse_var == pytest.approx(16.44806353991302)


def test_lmc_on_linear_problem():
    p = lassomc.LinearProblem(20)
    assert p.reference() == (0.0, pytest.approx(float(np.sum(p.alpha**2))))
    r = lassomc.lmc_run(p, 100, folds=5, big_m=2000, lam="sparsity", seed=3)
    assert r.budget_N == 100
    assert len(r.fold_lambdas) == 5
    assert abs(r.mean) < 0.5
    assert r.variance == pytest.approx(p.reference()[1], rel=0.3)


def test_lmc_estimate_errors():
    v = np.zeros((12, 2))
    with pytest.raises(lassomc.ParameterError):
        lassomc.lmc_estimate(v, np.zeros(12), np.zeros((50, 2)), folds=5)


def test_sobol_domain():
    p = lassomc.SobolProblem(3)
    x = p.sample(10, seed=1)
    assert x.shape == (10, 3)
    assert np.all(p.evaluate(x) > 0)
    with pytest.raises(lassomc.DomainError):
        p.evaluate(np.full((1, 3), 2.0))


def test_pce_moments():
    rng = np.random.default_rng(4)
    x = rng.uniform(size=(300, 3))
    y = 2.0 + 3.0 * x[:, 0] + x[:, 0] * x[:, 1] + x[:, 2] ** 2
    mean, var = lassomc.pce_fit(x, y, degree=2, lam="fixed:0").moments()
    assert mean == pytest.approx(2 + 1.5 + 0.25 + 1 / 3, rel=1e-8)
    assert var == pytest.approx(37 / 9 - 49 / 16 + 4 / 45, rel=1e-8)
    assert lassomc.basis_size(8, 3) == 165
    with pytest.raises(lassomc.CapacityError):
        lassomc.basis_size(400, 3)


def test_experiment_and_summary():
    recs = lassomc.run_experiment(
        "linear", ["mc", "lmc"], [20, 40], repeats=3, big_m=200, lam="sparsity", dim=10, timing=False
    )
    assert len(recs) == 12
    again = lassomc.run_experiment(
        "linear", ["mc", "lmc"], [20, 40], repeats=3, big_m=200, lam="sparsity", dim=10, timing=False
    )
    assert recs == again
    ref = lassomc.LinearProblem(10).reference()
    rows = lassomc.summarize(recs, *ref)
    assert len(rows) == 4
    assert all(math.isfinite(r["mse_var"]) for r in rows)
    with pytest.raises(lassomc.ConfigError):
        lassomc.run_experiment("rosenbrock", ["mc"], [10], repeats=2)
