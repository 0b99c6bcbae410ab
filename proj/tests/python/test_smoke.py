import numpy as np
import pytest

import eivreg


def low_rank(n, p, r, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, r)) @ rng.standard_normal((r, p))


def test_svd_reconstructs():
    a = low_rank(8, 5, 3, 0)
    u, s, v = eivreg.svd(a)
    np.testing.assert_allclose(u @ np.diag(s) @ v.T, a, atol=1e-12)
    assert np.all(np.diff(s) <= 0)
    assert eivreg.spectral_norm(a) == pytest.approx(s[0])


def test_hsvt_keeps_large_components():
    a = low_rank(10, 6, 2, 1)
    assert eivreg.effective_rank(a, 1e-8) == 2
    np.testing.assert_allclose(eivreg.hsvt(a, 1e-8), a, atol=1e-12)
    assert np.count_nonzero(eivreg.hsvt(a, 1e9)) == 0


def test_noiseless_fit_is_exact():
    a = low_rank(40, 12, 3, 2)
    beta = np.zeros(12)
    beta[[1, 5]] = [1.0, -0.5]
    ey = a @ beta
    omega = list(range(20))
    out = eivreg.fit(a, ey[:20], omega, {"kind": "FixedRank", "k": 3})
    assert out["estimate"]["rank"] == 3
    assert eivreg.mse_test(out["y_hat"], ey) < 1e-20
    assert eivreg.mse_train(out["y_hat"], ey, omega) < 1e-20


def test_masked_fit_and_observed_fraction():
    a = low_rank(30, 10, 2, 3)
    mask = np.random.default_rng(4).random(a.shape) < 0.8
    assert eivreg.observed_fraction(a, mask) == pytest.approx(mask.mean())
    est = eivreg.denoise(a, {"kind": "FixedRank", "k": 2}, mask)
    assert est["a_hat"].shape == a.shape


def test_validation_errors_surface_as_value_error():
    with pytest.raises(ValueError):
        eivreg.fit(np.ones((4, 3)), np.ones(2), [0, 0], {"kind": "FixedRank", "k": 1})
    with pytest.raises(eivreg.ValidationError):
        eivreg.fit(np.ones((4, 3)), np.ones(2), [0, 1], {"kind": "Bogus"})


def test_sparse_equivalent_matches_image():
    x = low_rank(12, 8, 3, 5)
    beta = np.random.default_rng(6).standard_normal(8)
    out = eivreg.sparse_equivalent(x, beta)
    assert np.count_nonzero(out) <= 3
    np.testing.assert_allclose(x @ out, x @ beta, atol=1e-9)


def test_bounds_reference_values():
    params = {"k_alpha": 1.0, "gamma_cap": 1.0, "gamma_var": 1.0, "rho": 1.0}
    d = eivreg.delta_bound(params, 100, 100)
    assert d == pytest.approx(1121.8875254491277878, rel=1e-12)
    assert eivreg.spectral_bound(params, 100, 100, 1.0) == pytest.approx(469.30508351198490713, rel=1e-12)
    assert eivreg.spectral_bound(params, 100, 100) >= d


def test_scenario_and_experiment_roundtrip():
    config = {
        "N": 30, "p": 20, "n": 20, "rho": 0.8,
        "covariates": {"kind": "LowRankEven", "r": 3, "frob_const": 1.0},
        "covariate_noise": {"kind": "Gaussian", "sd": 0.2},
        "response_noise": {"kind": "Gaussian", "sd": 0.1},
        "beta_star": {"sparsity": 4, "magnitude_range": [0.5, 1.0]},
        "seed": 11,
    }
    s = eivreg.gen_scenario(config)
    assert s["z"].shape == (30, 20)
    assert len(s["omega"]) == 20
    spec = {"name": "py", "base": config, "sweep": [{"path": "p", "values": [20, 30]}], "trials": 2}
    csv, timing = eivreg.run_experiment(spec, threads=2)
    assert csv == eivreg.run_experiment(spec, threads=1)[0]
    assert len(csv.strip().splitlines()) == 5
    assert "mse_train" in eivreg.summarize_csv(csv)
    assert eivreg.preset("case1")["trials"] == 20


def test_time_series_helpers():
    t = np.arange(60)
    series = np.sin(2 * np.pi * t / 9)
    out = eivreg.ts_impute(series, 20, 41, {"kind": "FixedRank", "k": 2})
    np.testing.assert_allclose(out, series, atol=1e-9)
    forecast, rmse = eivreg.ts_forecast(series, 30, 6, {"kind": "FixedRank", "k": 2}, 5)
    assert forecast.shape == (5,)
    assert rmse < 1e-8
