import numpy as np
import pytest

from cellens import (EnsembleModel, RankDeficient, RobustFit, ShapeMismatch,
                     fit_ensemble_models, make_rng, mm_fit, model_from_json,
                     model_to_json, ols_fit, predict, s_scale)
from cellens.robustfit import C_BREAKDOWN, bisquare_rho
from cellens.reference import s_scale_grid


def test_s_scale_scale_equivariance():
    r = np.array([1.5, -1.5, 1.5, -1.5, 1.5])
    s1 = s_scale(r)
    s2 = s_scale(2 * r)
    assert s2 == pytest.approx(2 * s1, rel=1e-9)


def test_s_scale_gaussian_consistency():
    rng = make_rng(1)
    r = rng.standard_normal(100_000)
    assert s_scale(r, C_BREAKDOWN) == pytest.approx(1.0, rel=0.02)


def test_s_scale_pm_one_closed_form():
    # mean rho(1/sigma) = 1/2 has the closed form
    # sigma = 1 / (c * sqrt(1 - 2^(-1/3)))
    r = np.array([1.0, -1.0])
    got = s_scale(r, C_BREAKDOWN)
    closed = 1.0 / (C_BREAKDOWN * np.sqrt(1 - 2 ** (-1 / 3)))
    assert got == pytest.approx(closed, rel=1e-9)
    assert got == pytest.approx(s_scale_grid(r, C_BREAKDOWN), abs=1e-7)


def test_s_scale_matches_grid_oracle():
    rng = make_rng(2)
    for _ in range(5):
        r = rng.standard_normal(50) * rng.uniform(0.5, 3.0)
        assert s_scale(r) == pytest.approx(s_scale_grid(r, C_BREAKDOWN), abs=1e-6)


def test_s_scale_exact_fit():
    assert s_scale(np.zeros(10)) == 0.0
    # more than half zeros: no positive solution
    assert s_scale(np.array([0.0] * 6 + [1.0] * 4)) == 0.0


def test_mm_exact_fit():
    rng = make_rng(3)
    X = rng.standard_normal((40, 3))
    beta = np.array([1.0, -2.0, 0.5])
    fit = mm_fit(X, X @ beta, intercept=False)
    assert np.max(np.abs(fit.coefficients - beta)) < 1e-8
    assert fit.scale == pytest.approx(0.0, abs=1e-12)


def test_mm_regression_equivariance():
    rng = make_rng(4)
    X = rng.standard_normal((60, 2))
    y = X @ np.array([2.0, -1.0]) + 0.5 * rng.standard_normal(60)
    y[::7] += 20.0  # some outliers
    b = np.array([3.0, 1.0])
    f1 = mm_fit(X, y, intercept=False, seed=5)
    f2 = mm_fit(X, y + X @ b, intercept=False, seed=5)
    assert np.max(np.abs(f2.coefficients - (f1.coefficients + b))) < 1e-6


def test_mm_resists_response_outliers():
    rng = make_rng(6)
    n = 100
    x = rng.standard_normal(n)
    y_clean = 2.0 * x + 0.5 * rng.standard_normal(n)
    clean_slope = ols_fit(x, y_clean, intercept=True)[0][0]
    y = y_clean.copy()
    out_rows = rng.choice(n, size=20, replace=False)
    y[out_rows] += 50.0
    robust_slope = mm_fit(x[:, None], y, intercept=True).coefficients[0]
    ols_slope = ols_fit(x, y, intercept=True)[0][0]
    assert abs(robust_slope - clean_slope) < 0.05
    assert abs(ols_slope - clean_slope) > 0.5


def test_mm_affine_equivariance_of_columns():
    rng = make_rng(7)
    X = rng.standard_normal((70, 3))
    y = X @ np.array([1.0, 2.0, -1.5]) + 0.3 * rng.standard_normal(70)
    y[::9] -= 15.0
    c = np.array([2.0, -0.5, 1.5])
    a = np.array([1.0, -2.0, 0.5])
    f1 = mm_fit(X, y, intercept=True, seed=8)
    f2 = mm_fit(X * c + a, y, intercept=True, seed=8)
    assert np.max(np.abs(f2.coefficients - f1.coefficients / c)) < 1e-6
    assert f2.intercept == pytest.approx(f1.intercept - np.sum(a * f1.coefficients / c),
                                         abs=1e-5)


def test_mm_m_stage_descends():
    rng = make_rng(9)
    X = rng.standard_normal((50, 2))
    y = X @ np.array([1.0, 1.0]) + rng.standard_normal(50)
    y[:10] += 30.0
    fit = mm_fit(X, y, intercept=True)
    assert fit.scale > 0
    # objective at the returned fit no worse than at the plain OLS fit
    coef, b0 = ols_fit(X, y, intercept=True)
    r_ols = y - X @ coef - b0
    r_mm = y - X @ fit.coefficients - fit.intercept
    from cellens.robustfit import C_EFFICIENCY

    assert np.mean(bisquare_rho(r_mm / fit.scale, C_EFFICIENCY)) <= \
        np.mean(bisquare_rho(r_ols / fit.scale, C_EFFICIENCY)) + 1e-12


def test_mm_rank_deficient():
    rng = make_rng(10)
    X = np.column_stack([np.ones(20), np.ones(20)])
    with pytest.raises(RankDeficient):
        mm_fit(X, rng.standard_normal(20), intercept=False)


def test_mm_too_many_columns():
    rng = make_rng(11)
    with pytest.raises(RankDeficient):
        mm_fit(rng.standard_normal((5, 5)), rng.standard_normal(5),
               intercept=False)


def test_mm_empty_design_location():
    rng = make_rng(12)
    y = 3.0 + rng.standard_normal(50)
    fit = mm_fit(np.empty((50, 0)), y, intercept=True)
    assert fit.coefficients.size == 0
    assert fit.intercept == pytest.approx(3.0, abs=0.5)


def test_predict_shapes_and_averaging():
    rng = make_rng(13)
    X = rng.standard_normal((30, 6))
    y = X[:, 0] - X[:, 3] + 0.1 * rng.standard_normal(30)
    model = fit_ensemble_models(y, X, [[0], [3]], intercept=True)
    single = fit_ensemble_models(y, X, [[0]], intercept=True)
    p1 = predict(single, X)
    f0 = model.fits[0]
    expected0 = f0.intercept + X[:, [0]] @ f0.coefficients
    assert np.allclose(p1, expected0, atol=1e-12)
    # two identical fits average to either
    twin = EnsembleModel(fits=[model.fits[0], model.fits[0]],
                         sets=[[0], [0]], p=6, intercept=True)
    assert np.allclose(predict(twin, X), expected0, atol=1e-12)
    # general mean
    f1 = model.fits[1]
    expected1 = f1.intercept + X[:, [3]] @ f1.coefficients
    assert np.allclose(predict(model, X), (expected0 + expected1) / 2, atol=1e-12)


def test_predict_empty_set_contributes_intercept():
    rng = make_rng(14)
    X = rng.standard_normal((25, 4))
    y = 5.0 + X[:, 1] + 0.1 * rng.standard_normal(25)
    model = fit_ensemble_models(y, X, [[1], []], intercept=True)
    pred = predict(model, X)
    f0, f1 = model.fits
    manual = ((f0.intercept + X[:, [1]] @ f0.coefficients)
              + np.full(25, f1.intercept)) / 2
    assert np.allclose(pred, manual, atol=1e-12)


def test_predict_shape_mismatch():
    model = EnsembleModel(
        fits=[RobustFit(coefficients=np.array([1.0]), intercept=0.0, scale=1.0,
                        converged=True, iterations=1)],
        sets=[[0]], p=3, intercept=False)
    with pytest.raises(ShapeMismatch):
        predict(model, np.zeros((4, 2)))


def test_model_json_roundtrip():
    rng = make_rng(15)
    X = rng.standard_normal((40, 5))
    y = X[:, 0] + 2 * X[:, 2] + 0.2 * rng.standard_normal(40)
    model = fit_ensemble_models(y, X, [[0, 2], [4], []], intercept=True)
    doc = model_to_json(model)
    back = model_from_json(doc)
    assert back.sets == model.sets
    assert back.p == model.p and back.intercept == model.intercept
    Xnew = rng.standard_normal((7, 5))
    assert np.allclose(predict(back, Xnew), predict(model, Xnew), atol=1e-15)


def test_model_json_rejects_unknown_schema():
    import json

    from cellens import make_rng

    rng = make_rng(16)
    X = rng.standard_normal((30, 3))
    y = X[:, 0] + 0.1 * rng.standard_normal(30)
    doc = json.loads(model_to_json(fit_ensemble_models(y, X, [[0]])))
    doc["schema_version"] = 99
    with pytest.raises(ShapeMismatch):
        model_from_json(json.dumps(doc))
