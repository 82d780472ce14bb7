import math

import numpy as np
import pytest
from scipy.stats import qmc

from fracvisc import ConfigError, DomainError, ParamRanges, saltelli_indices, sobol_points
from fracvisc.gsa import (SampleMatrices, ishigami, ishigami_first_order, ishigami_ranges,
                          max_dimension, model_sobol_indices)
from fracvisc.reference import reference_model
from fracvisc.viscomodel import PARAM_NAMES


def test_first_points_one_dimension():
    np.testing.assert_array_equal(sobol_points(4, 1, skip=1).ravel(), [0.5, 0.75, 0.25, 0.375])


@pytest.mark.parametrize("k", [1, 2, 7, 16, 21])
def test_matches_reference_generator(k):
    np.testing.assert_array_equal(sobol_points(512, k), qmc.Sobol(k, scramble=False).random(512))


def test_range_and_dimension_limits():
    assert max_dimension() >= 16
    P = sobol_points(1000, 16, scramble=True, seed=2)
    assert P.min() >= 0 and P.max() < 1
    with pytest.raises(ConfigError):
        sobol_points(10, max_dimension() + 1)
    with pytest.raises(ConfigError):
        sobol_points(0, 2)


def test_discrepancy_proxy_beats_pseudorandom():
    def proxy(P):
        n = P.shape[0]
        S = np.sort(P, axis=0)
        ecdf = np.arange(1, n + 1)[:, None] / n
        return np.max(np.maximum(np.abs(ecdf - S), np.abs(ecdf - 1 / n - S)))
    assert proxy(sobol_points(1024, 5)) < proxy(np.random.default_rng(0).random((1024, 5)))


def test_scrambling_is_seeded_and_balanced():
    a = sobol_points(256, 3, scramble=True, seed=1)
    assert np.array_equal(a, sobol_points(256, 3, scramble=True, seed=1))
    assert not np.array_equal(a, sobol_points(256, 3, scramble=True, seed=2))
    # a scrambled (0, m, s)-net keeps one point per dyadic interval of length 1/256
    for j in range(3):
        assert np.array_equal(np.sort(np.floor(a[:, j] * 256)), np.arange(256))


def test_sample_matrices_structure():
    M = SampleMatrices.sobol(64, 4)
    for i in range(4):
        AB = M.AB(i)
        diff = np.any(AB != M.A, axis=0)
        assert diff.tolist() == [j == i for j in range(4)]
        np.testing.assert_array_equal(AB[:, i], M.B[:, i])


def test_additive_linear_model():
    r = ParamRanges(("q1", "q2"), [0, 5], [2, 7])
    res = saltelli_indices(lambda Q: Q[:, 0] + Q[:, 1], r, 2 ** 14)
    np.testing.assert_allclose(res.S.ravel(), [0.5, 0.5], atol=0.01)
    np.testing.assert_allclose(res.ST.ravel(), res.S.ravel(), atol=0.01)


def test_ishigami_closed_form():
    ref = ishigami_first_order()
    assert ref[0] == pytest.approx(0.3139, abs=1e-4) and ref[1] == pytest.approx(0.4424, abs=1e-4)
    res = saltelli_indices(ishigami, ishigami_ranges(), 2 ** 16)
    np.testing.assert_allclose(res.S.ravel(), ref, atol=0.01)
    assert res.N == 2 ** 16


def test_ishigami_error_decreases_with_N():
    ref = ishigami_first_order()
    errs = []
    for p in (10, 12, 14, 16):
        e = [np.max(np.abs(saltelli_indices(ishigami, ishigami_ranges(), 2 ** p, scramble=True,
                                            seed=s).S.ravel() - ref)) for s in range(5)]
        errs.append(np.median(e))
    assert all(b <= a for a, b in zip(errs, errs[1:])), errs


def test_degenerate_ranges_and_variance_flag():
    r = ParamRanges(("a", "b"), [1, 2], [1, 3])
    res = saltelli_indices(lambda Q: Q[:, 0] * Q[:, 1], r, 2 ** 14)
    assert np.all(res.S[0] == 0) and np.all(res.ST[0] == 0)
    assert res.S[1, 0] == pytest.approx(1.0, abs=0.02)
    res = saltelli_indices(lambda Q: np.column_stack([Q[:, 1], np.ones(len(Q))]), r, 256)
    assert res.degenerate.tolist() == [False, True]
    assert np.all(res.S[:, 1] == 0) and res.V[1] == 0


def test_all_ranges_degenerate_model(grid):
    m = reference_model("40HS/0.0")
    res = model_sobol_indices(m, ParamRanges.from_baseline(m, 0.0), N=64, grid=grid)
    assert np.all(res.S == 0) and np.all(res.ST == 0) and np.all(res.degenerate)


def test_validation_errors(grid):
    with pytest.raises(ConfigError):
        saltelli_indices(ishigami, ishigami_ranges(), 32)
    m = reference_model("20HS/0.0")
    lo = np.array(ParamRanges.from_baseline(m).lower)
    hi = np.array(ParamRanges.from_baseline(m).upper)
    hi[3] = 0.5   # beta1 range overlaps the alpha1 range
    with pytest.raises(DomainError):
        model_sobol_indices(m, ParamRanges(PARAM_NAMES, lo, hi), N=64, grid=grid)


@pytest.fixture(scope="module")
def fmm40(grid):
    return model_sobol_indices(reference_model("40HS/0.0"), N=2 ** 14, grid=grid)


@pytest.fixture(scope="module")
def fmg20(grid):
    return model_sobol_indices(reference_model("20HS/0.0", kind="FMG-FMG"), N=2 ** 14, grid=grid)


@pytest.mark.parametrize("name", ["fmm40", "fmg20"])
def test_model_index_properties(name, request):
    res = request.getfixturevalue(name)
    eps = 0.02
    assert res.S.min() >= -eps and res.S.max() <= 1 + eps
    assert res.ST.min() >= -eps and res.ST.max() <= 1 + eps
    assert np.all(res.ST >= res.S - eps)
    assert np.all(res.S.sum(axis=0) <= 1 + eps)
    assert np.max(np.abs(res.ST - res.S)) < 0.03


def test_model_indices_deterministic(grid, fmm40):
    again = model_sobol_indices(reference_model("40HS/0.0"), N=2 ** 14, grid=grid, n_jobs=4)
    assert np.array_equal(again.S, fmm40.S) and np.array_equal(again.ST, fmm40.ST)
