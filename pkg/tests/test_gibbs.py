import numpy as np
import pytest
from scipy.stats import norm

from mqgm.features import fit_basis
from mqgm.gibbs import GibbsConfig, gibbs_sample, precompute_offsets
from mqgm.proxops import QuantileGrid
from mqgm.solver import SolverConfig, fit_mqgm
from helpers import hand_model

LEVELS = tuple(np.round(np.arange(0.05, 0.951, 0.05), 2))


def normal_model(d=3):
    q = norm.ppf(LEVELS)
    return hand_model(d, [q] * d, levels=LEVELS, medians=np.zeros(d))


@pytest.fixture(scope="module")
def ring_model():
    from mqgm.synthdata import gen_ring
    inst = gen_ring(150, seed=3)
    spec = fit_basis(inst.data, 5)
    return fit_mqgm(inst.data, spec, QuantileGrid.uniform(9), SolverConfig(lambda1=2.0))


def test_marginals_of_intercept_model():
    out = gibbs_sample(normal_model(), cfg=GibbsConfig(n_samples=5000, burn_in=10, thin=1, seed=1))
    for k in range(3):
        np.testing.assert_allclose(np.quantile(out[:, k], [0.25, 0.5, 0.75]), [-0.674, 0.0, 0.674], atol=0.1)


def test_empty_and_shape():
    assert gibbs_sample(normal_model(), cfg=GibbsConfig(n_samples=0)).shape == (0, 3)
    assert gibbs_sample(normal_model(), cfg=GibbsConfig(n_samples=7, burn_in=0)).shape == (7, 3)


def test_seed_determinism(ring_model):
    cfg = GibbsConfig(n_samples=50, seed=9)
    a = gibbs_sample(ring_model, cfg=cfg)
    b = gibbs_sample(ring_model, cfg=cfg)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, gibbs_sample(ring_model, cfg=GibbsConfig(n_samples=50, seed=10)))


def test_running_features_exact(ring_model):
    stats = {}
    gibbs_sample(ring_model, cfg=GibbsConfig(n_samples=200, thin=2), check_every=100, stats=stats)
    assert stats["checks"] > 0
    assert stats["max_feature_deviation"] <= 1e-12


def test_thinning_keeps_pass_states(ring_model):
    # thin=3 keeps passes 2, 5, 8, ... of the same stream that thin=1 keeps one by one
    a = gibbs_sample(ring_model, cfg=GibbsConfig(n_samples=12, burn_in=0, thin=1, seed=4))
    b = gibbs_sample(ring_model, cfg=GibbsConfig(n_samples=4, burn_in=0, thin=3, seed=4))
    np.testing.assert_array_equal(b, a[2::3])


def test_ring_samples_stay_near_ring(ring_model):
    out = gibbs_sample(ring_model, cfg=GibbsConfig(n_samples=500, seed=2))
    radius = np.hypot(out[:, 0], out[:, 1])
    assert 0.7 < np.median(radius) < 1.3


class TestOffsets:
    def _model(self):
        q = norm.ppf(LEVELS)
        tx = [np.full((1, len(LEVELS)), 0.5), np.linspace(-1, 1, len(LEVELS))[None, :]]
        return hand_model(2, [q, q], levels=LEVELS, p=1, theta_x=tx, medians=np.zeros(2))

    def test_zero_x(self):
        np.testing.assert_array_equal(precompute_offsets(self._model(), [0.0]), np.zeros((2, len(LEVELS))))

    def test_scalar_multiple(self):
        m = self._model()
        np.testing.assert_allclose(precompute_offsets(m, [2.0])[1], 2 * m.fits[1].theta_x[0])

    def test_cache_equivalence(self):
        m = self._model()
        cfg = GibbsConfig(n_samples=100, seed=5)
        a = gibbs_sample(m, x=[1.5], cfg=cfg, use_offset_cache=True)
        b = gibbs_sample(m, x=[1.5], cfg=cfg, use_offset_cache=False)
        np.testing.assert_array_equal(a, b)

    def test_x_required(self):
        with pytest.raises(ValueError):
            gibbs_sample(self._model())


class TestErrors:
    def test_config(self):
        for kw in (dict(n_samples=-1), dict(thin=0), dict(seed=-1), dict(seed=2 ** 64)):
            with pytest.raises(ValueError):
                GibbsConfig(**kw)

    def test_init(self):
        with pytest.raises(ValueError):
            gibbs_sample(normal_model(), init=[0.0, np.nan, 0.0])
        bare = hand_model(2, [norm.ppf(LEVELS)] * 2, levels=LEVELS)
        with pytest.raises(ValueError, match="init"):
            gibbs_sample(bare)

    def test_non_finite_quantile(self):
        q = norm.ppf(LEVELS)
        theta = np.zeros((2, len(LEVELS)))
        theta[0] = 1e308
        # y1 is always drawn as 5, so 5e308 overflows in the update of y2
        m = hand_model(2, [np.full(len(LEVELS), 5.0), q], [np.zeros((2, len(LEVELS))), theta], levels=LEVELS)
        with pytest.raises(FloatingPointError, match="variable 1 in pass 0"):
            gibbs_sample(m, init=[10.0, 0.0])
