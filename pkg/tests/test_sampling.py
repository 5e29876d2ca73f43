"""Simplex sampler: uniformity on the simplex, counter semantics, primal map.

Under the uniform (flat Dirichlet) law each coordinate has marginal
Beta(1, d-1): mean 1/d, variance (d-1)/(d^2 (d+1)), CDF 1-(1-t)^(d-1).
Those closed forms are the oracles here.
"""
import numpy as np
import pytest

from hullexplain.errors import InvalidInputError
from hullexplain.sampling import SimplexSampler, map_to_primal


class TestSimplexValidity:
    def test_rows_are_simplex_vectors(self):
        lam = SimplexSampler(d=6, seed=1).draw(500)
        assert lam.shape == (500, 6)
        assert np.all(lam >= 0.0)
        assert np.max(np.abs(lam.sum(axis=1) - 1.0)) <= 1e-12

    def test_d_one_is_constant(self):
        lam = SimplexSampler(d=1, seed=1).draw(5)
        assert np.array_equal(lam, np.ones((5, 1)))

    def test_zero_draws(self):
        assert SimplexSampler(d=3, seed=1).draw(0).shape == (0, 3)


class TestUniformLaw:
    def test_coordinate_moments(self):
        d = 5
        lam = SimplexSampler(d=d, seed=7).draw(200_000)
        want_mean = 1.0 / d
        want_var = (d - 1) / (d**2 * (d + 1))
        assert np.max(np.abs(lam.mean(axis=0) - want_mean)) < 0.002
        assert np.max(np.abs(lam.var(axis=0) - want_var)) < 0.001

    def test_marginal_cdf(self):
        # Beta(1, d-1) Kolmogorov check on the first coordinate
        d = 4
        lam = SimplexSampler(d=d, seed=11).draw(50_000)
        x = np.sort(lam[:, 0])
        emp = np.arange(1, x.size + 1) / x.size
        model = 1.0 - (1.0 - x) ** (d - 1)
        assert np.max(np.abs(emp - model)) < 1.36 / np.sqrt(x.size) * 1.5

    def test_pairwise_covariance(self):
        d = 3
        lam = SimplexSampler(d=d, seed=13).draw(200_000)
        want = -1.0 / (d**2 * (d + 1))
        cov = np.cov(lam[:, 0], lam[:, 1])[0, 1]
        assert abs(cov - want) < 5e-4


class TestCounterSemantics:
    def test_reproducible(self):
        a = SimplexSampler(d=4, seed=3, stream_id=2).draw(10)
        b = SimplexSampler(d=4, seed=3, stream_id=2).draw(10)
        assert np.array_equal(a, b)

    def test_draws_continue_the_stream(self):
        s = SimplexSampler(d=4, seed=3)
        chunks = np.vstack([s.draw(2), s.draw(3)])
        whole = SimplexSampler(d=4, seed=3).draw(5)
        assert np.array_equal(chunks, whole)

    def test_streams_differ(self):
        a = SimplexSampler(d=4, seed=3, stream_id=0).draw(4)
        b = SimplexSampler(d=4, seed=3, stream_id=1).draw(4)
        assert not np.allclose(a, b)


class TestMapToPrimal:
    def test_vertices_map_to_extremes(self):
        ext = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]])
        assert np.allclose(map_to_primal(np.eye(3), ext), ext)

    def test_single_vector(self):
        ext = np.array([[0.0, 0.0], [2.0, 0.0]])
        out = map_to_primal(np.array([0.25, 0.75]), ext)
        assert out.shape == (2,)
        assert np.allclose(out, [1.5, 0.0])

    def test_images_lie_in_the_hull(self):
        ext = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        lam = SimplexSampler(d=3, seed=5).draw(200)
        pts = map_to_primal(lam, ext)
        # hull of the unit triangle: x,y >= 0 and x+y <= 1
        assert np.all(pts >= -1e-12)
        assert np.all(pts.sum(axis=1) <= 1.0 + 1e-12)

    def test_rejects_bad_weights(self):
        ext = np.eye(2)
        with pytest.raises(InvalidInputError):
            map_to_primal(np.array([0.5, 0.6]), ext)  # sums to 1.1
        with pytest.raises(InvalidInputError):
            map_to_primal(np.array([-0.2, 1.2]), ext)  # negative entry
        with pytest.raises(InvalidInputError):
            map_to_primal(np.array([0.5, 0.25, 0.25]), ext)  # wrong width

    def test_rejects_bad_dimension(self):
        with pytest.raises(InvalidInputError):
            SimplexSampler(d=0, seed=1)
