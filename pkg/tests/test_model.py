import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from mqgm.features import Dataset, fit_basis
from mqgm.model import (EdgeSet, MqgmModel, conditional_quantiles, extract_edges, interpolate_rows,
                        inverse_cdf_sample_value, load_model)
from mqgm.proxops import QuantileGrid
from mqgm.solver import SolverConfig, fit_mqgm
from helpers import hand_model


@pytest.fixture(scope="module")
def fitted():
    rng = np.random.default_rng(0)
    y1 = rng.normal(size=120)
    ds = Dataset(np.column_stack([y1, y1 ** 2 + 0.3 * rng.normal(size=120), rng.normal(size=120)]))
    spec = fit_basis(ds, 4)
    return fit_mqgm(ds, spec, QuantileGrid.uniform(5), SolverConfig(lambda1=3.0)), ds


class TestConditionalQuantiles:
    def test_huge_lambda_returns_intercepts(self):
        rng = np.random.default_rng(1)
        ds = Dataset(rng.normal(size=(40, 3)))
        model = fit_mqgm(ds, fit_basis(ds, 3), QuantileGrid.uniform(3), SolverConfig(lambda1=1e6))
        for y in rng.normal(size=(5, 3)) * 3:
            np.testing.assert_array_equal(conditional_quantiles(model, 2, y), model.fits[2].intercepts)

    def test_hand_affine(self):
        theta0 = np.array([[0.0, 0.0], [2.0, 3.0]])
        theta1 = np.array([[-1.0, 1.0], [0.0, 0.0]])
        model = hand_model(2, [[0.0, 1.0], [0.5, 0.5]], [theta0, theta1], levels=(0.3, 0.7))
        np.testing.assert_allclose(conditional_quantiles(model, 0, np.array([9.0, 2.0])), [4.0, 7.0])
        # the fitted rows cross at y0 = 1 -> output is rearranged
        np.testing.assert_allclose(conditional_quantiles(model, 1, np.array([2.0, 0.0])), [-1.5, 2.5])

    def test_monotone_for_random_queries(self, fitted):
        model, _ = fitted
        rng = np.random.default_rng(2)
        for y in rng.normal(size=(100, 3)) * 2:
            for k in range(3):
                assert np.all(np.diff(conditional_quantiles(model, k, y)) >= 0)

    def test_dimension_checks(self, fitted):
        model, _ = fitted
        with pytest.raises(ValueError):
            conditional_quantiles(model, 0, np.zeros(2))
        with pytest.raises(ValueError):
            conditional_quantiles(model, 0, np.zeros(3), x=np.zeros(1))

    def test_quantile_rows_agree(self, fitted):
        model, ds = fitted
        Q = model.quantile_rows(1, ds.Y[:7])
        for i in range(7):
            np.testing.assert_allclose(Q[i], conditional_quantiles(model, 1, ds.Y[i]), atol=1e-12)

    def test_exogenous_offsets(self):
        model = hand_model(2, [[0.0, 1.0, 2.0]] * 2, p=1, theta_x=[[[1.0, 1.0, 1.0]], [[0.0, 2.0, 4.0]]])
        np.testing.assert_allclose(conditional_quantiles(model, 1, np.zeros(2), x=np.array([2.0])),
                                   [0.0, 5.0, 10.0])
        np.testing.assert_allclose(model.offsets([2.0]), [[2.0, 2.0, 2.0], [0.0, 4.0, 8.0]])
        with pytest.raises(ValueError):
            conditional_quantiles(model, 1, np.zeros(2))


class TestInverseCdf:
    def test_knots(self):
        levels = QuantileGrid.uniform(4)
        Q = np.array([-1.0, 0.0, 0.5, 2.0])
        for a, q in zip(levels.array, Q):
            assert inverse_cdf_sample_value(Q, levels, a) == q

    def test_midpoint(self):
        assert inverse_cdf_sample_value([0.0, 1.0], QuantileGrid((0.25, 0.75)), 0.5) == 0.5

    def test_clamp(self):
        grid = QuantileGrid((0.05, 0.5, 0.95))
        assert inverse_cdf_sample_value([1.0, 2.0, 3.0], grid, 0.01) == 1.0
        assert inverse_cdf_sample_value([1.0, 2.0, 3.0], grid, 0.99) == 3.0

    @given(arrays(float, (30,), elements=st.floats(0, 1)))
    def test_rows_match_scalar(self, alphas):
        grid = QuantileGrid.uniform(5)
        Q = np.sort(np.random.default_rng(3).normal(size=(30, 5)), axis=1)
        out = interpolate_rows(Q, grid.array, alphas)
        ref = [inverse_cdf_sample_value(Q[i], grid, alphas[i]) for i in range(30)]
        np.testing.assert_allclose(out, ref, atol=1e-12)


class TestEdges:
    def test_all_zero(self):
        assert len(extract_edges(hand_model(3, [[0, 1, 2]] * 3))) == 0

    def test_single_block(self):
        thetas = [np.zeros((3, 3)) for _ in range(3)]
        thetas[0][1, 2] = 1e-9
        e = extract_edges(hand_model(3, [[0, 1, 2]] * 3, thetas), threshold=0.0)
        assert e.pairs() == [(0, 1)]
        assert np.array_equal(e.adjacency, e.adjacency.T)

    def test_threshold_monotone(self, fitted):
        model, _ = fitted
        counts = [len(extract_edges(model, t)) for t in np.geomspace(1e-8, 10, 30)]
        assert all(b <= a for a, b in zip(counts, counts[1:]))
        with pytest.raises(ValueError):
            extract_edges(model, -1.0)

    def test_edge_set_validation(self):
        with pytest.raises(ValueError):
            EdgeSet(np.array([[0, 1], [0, 0]]), np.zeros((2, 2)))
        with pytest.raises(ValueError):
            EdgeSet(np.eye(2), np.zeros((2, 2)))


class TestSerialization:
    def test_roundtrip(self, fitted, tmp_path):
        model, ds = fitted
        path = tmp_path / "model.json"
        model.save(path)
        again = load_model(path)
        rng = np.random.default_rng(4)
        for y in rng.normal(size=(20, 3)):
            for k in range(3):
                np.testing.assert_allclose(conditional_quantiles(again, k, y),
                                           conditional_quantiles(model, k, y), atol=1e-12, rtol=0)
        np.testing.assert_array_equal(again.medians, model.medians)
        assert again.config == model.config

    def test_sparse_blocks(self, fitted):
        obj = fitted[0].to_dict()
        assert all(str(k) not in f["blocks"] for k, f in enumerate(obj["fits"]))

    def test_bad_format(self, fitted):
        obj = fitted[0].to_dict()
        obj["format"] = "other"
        with pytest.raises(ValueError):
            MqgmModel.from_dict(obj)

    def test_inconsistent_shapes(self):
        with pytest.raises(ValueError):
            hand_model(2, [[0, 1, 2], [0, 1]])
