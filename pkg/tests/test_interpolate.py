import math

import numpy as np
import pytest
import scipy.linalg

from minnorm import sphere, torus
from minnorm.basis import BasisSpec, kernel_matrix, tail_bound
from minnorm.errors import IllConditionedError, RankDeficientError
from minnorm.interpolate import (
    SampleSet,
    SeriesFunction,
    assemble,
    interp_tol,
    kernel_interpolant,
    least_squares_fit,
    min_norm_interpolant,
    near_optimal_interpolant,
    pinv_kernel_fit,
    weighted_norm,
)

S1 = BasisSpec.torus_sobolev(1, 1.0)
S2 = BasisSpec.torus_sobolev(1, 2.0)


def torus_points(n, d=1, seed=0):
    return np.random.default_rng(seed).random((n, d))


def kkt_solution(spec, x, y, p):
    """Minimize sum w_j c_j^2 subject to A^t c = y via the saddle-point system."""
    A = spec.basis_matrix(p, x)
    W = np.diag(spec.weight_values(p))
    n = x.shape[0]
    M = np.block([[2 * W, A], [A.T, np.zeros((n, n))]])
    sol = np.linalg.solve(M, np.concatenate([np.zeros(p), y]))
    return sol[:p]


class TestSampleSet:
    def test_validation(self):
        with pytest.raises(ValueError):
            SampleSet(S1, torus_points(3), [1.0, 2.0])
        with pytest.raises(ValueError):
            SampleSet(S1, [[0.1], [0.1]], [1.0, 2.0])
        with pytest.raises(ValueError):
            SampleSet(S1, torus_points(2), [1.0, np.nan])

    def test_geometry(self):
        X = SampleSet(S1, [[0.0], [0.5]], [0.0, 1.0])
        assert X.mesh_norm == pytest.approx(0.25)
        assert X.separation_radius == pytest.approx(0.25)

    def test_from_function(self):
        X = SampleSet.from_function(S1, [[1.25]], lambda x: x[:, 0])
        assert X.values[0] == pytest.approx(0.25)


class TestMinNorm:
    def test_single_point(self):
        x = np.array([[0.3]])
        for p in (1, 3, 9):
            f = min_norm_interpolant(S1, x, p, [2.0])
            t = np.linspace(0, 1, 17)[:, None]
            want = 2.0 * kernel_matrix(S1, p, t, x)[:, 0] / kernel_matrix(S1, p, x)[0, 0]
            np.testing.assert_allclose(f(t), want, atol=1e-14)

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_kkt(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 9))
        p = S2.admissible(int(rng.integers(n + 1, 31)))
        if p < n:
            p = S2.next_admissible(p)
        x = torus_points(n, seed=seed)
        y = rng.standard_normal(n)
        f = min_norm_interpolant(S2, x, p, y)
        np.testing.assert_allclose(f.coefficients, kkt_solution(S2, x, y, p), atol=1e-9)

    def test_kernel_and_coefficient_forms_agree(self):
        spec = BasisSpec.torus_sobolev(2, 2.0)
        x = torus_points(15, 2, seed=3)
        y = np.sin(x.sum(1))
        f = min_norm_interpolant(spec, x, 81, y)
        probe = torus_points(50, 2, seed=4)
        np.testing.assert_allclose(f(probe), f.eval_kernel_form(probe), atol=1e-10)

    @pytest.mark.parametrize(
        "spec,pts",
        [
            (S2, torus_points(25, seed=5)),
            (BasisSpec.torus_mixed(2, 1.0), torus_points(30, 2, seed=6)),
            (BasisSpec.sphere_power(3, 2.0), sphere.fibonacci_sphere(30)),
            (BasisSpec.ntk(3), sphere.fibonacci_sphere(20)),
        ],
        ids=lambda v: v.describe() if isinstance(v, BasisSpec) else "",
    )
    def test_interpolates(self, spec, pts):
        y = np.cos(3 * pts[:, 0]) + pts[:, -1]
        p = spec.admissible(4 * len(pts))
        f = min_norm_interpolant(spec, pts, p, y)
        assert np.max(np.abs(f(pts) - y)) <= interp_tol(y)

    def test_null_space_perturbation_increases_norm(self):
        x = torus_points(7, seed=8)
        y = np.random.default_rng(8).standard_normal(7)
        p = 21
        f = min_norm_interpolant(S2, x, p, y)
        A = S2.basis_matrix(p, x)
        N = scipy.linalg.null_space(A.T)
        w = S2.weight_values(p)
        base = np.sum(w * f.coefficients**2)
        rng = np.random.default_rng(9)
        for _ in range(10):
            c = f.coefficients + N @ rng.standard_normal(N.shape[1]) * 1e-2
            np.testing.assert_allclose(A.T @ c, y, atol=1e-10)
            assert np.sum(w * c**2) > base

    def test_weighted_norm_identity(self):
        x = torus_points(9, seed=10)
        y = np.random.default_rng(10).standard_normal(9)
        f = min_norm_interpolant(S2, x, 31, y)
        K = kernel_matrix(S2, 31, x)
        assert weighted_norm(S2, f) == pytest.approx(math.sqrt(y @ np.linalg.solve(K, y)), rel=1e-9)

    def test_norm_decreases_to_kernel_norm(self):
        # a larger span only enlarges the feasible set
        x = torus_points(9, seed=11)
        y = np.random.default_rng(11).standard_normal(9)
        norms = [weighted_norm(S1, min_norm_interpolant(S1, x, p, y)) for p in (9, 15, 31, 63, 255)]
        assert all(b <= a + 1e-10 for a, b in zip(norms, norms[1:]))
        limit = weighted_norm(S1, kernel_interpolant(S1, x, y))
        assert norms[-1] >= limit - 1e-9
        assert norms[-1] - limit < norms[0] - limit

    def test_p_too_small(self):
        with pytest.raises(RankDeficientError):
            min_norm_interpolant(S1, torus_points(6), 5, np.zeros(6))

    def test_aliased_equispaced_is_rank_deficient(self):
        # 4 equispaced points cannot separate cos(2 pi 2 x) from the constant
        # at p = 5 when only k = 0, +-1 and one member of +-2 matter
        x = (np.arange(4) / 4)[:, None]
        gram = assemble(S1, x, 5)
        assert gram.rank == 4
        f = min_norm_interpolant(S1, x, 5, [1.0, 0.0, 1.0, 0.0])
        assert np.max(np.abs(f(x) - [1.0, 0.0, 1.0, 0.0])) <= 1e-12

    def test_ill_conditioned_raises_unless_fallback(self):
        x = np.array([[0.0], [1e-7]])
        y = np.array([0.0, 1.0])
        with pytest.raises(IllConditionedError):
            min_norm_interpolant(S2, x, 5, y)
        f = min_norm_interpolant(S2, x, 5, y, fallback=True)
        assert f.status == "fallback"
        assert np.max(np.abs(f(x) - y)) <= 1e-6


class TestKernel:
    @pytest.mark.parametrize("seed", range(5))
    def test_green_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 21))
        x = np.sort(rng.random(n))
        y = rng.standard_normal(n)
        G = torus.green_kernel_1d(x[:, None] - x[None, :])
        c = np.linalg.solve(G, y)
        t = np.linspace(0, 1, 513)
        want = torus.green_kernel_1d(t[:, None] - x[None, :]) @ c
        f = kernel_interpolant(S1, x[:, None], y)
        np.testing.assert_allclose(f(t[:, None]), want, atol=1e-10)

    def test_limit_of_min_norm(self):
        x = torus_points(10, seed=12)
        y = np.cos(2 * np.pi * x[:, 0])
        ref = kernel_interpolant(S2, x, y)
        t = np.linspace(0, 1, 400)[:, None]
        gaps = [np.max(np.abs(min_norm_interpolant(S2, x, p, y)(t) - ref(t))) for p in (31, 63, 127, 255)]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] <= 1e-4

    def test_surrogate_fallback(self):
        spec = BasisSpec.torus_sobolev(1, 4.0)
        x = (np.arange(40) / 40)[:, None]
        y = np.sin(2 * np.pi * x[:, 0])
        with pytest.raises(np.linalg.LinAlgError):
            kernel_interpolant(spec, x, y)
        f = kernel_interpolant(spec, x, y, fallback=True)
        assert f.status == "fallback"
        assert np.max(np.abs(f(x) - y)) <= 1e-8


class TestLeastSquares:
    def test_p1_is_mean(self):
        x = torus_points(12, seed=13)
        y = np.random.default_rng(13).standard_normal(12)
        f = least_squares_fit(S1, x, 1, y)
        np.testing.assert_allclose(f(torus_points(5)), y.mean(), atol=1e-14)

    def test_p_equals_n_interpolates(self):
        x = torus_points(9, seed=14)
        y = np.random.default_rng(14).standard_normal(9)
        f = least_squares_fit(S1, x, 9, y)
        np.testing.assert_allclose(f(x), y, atol=1e-9)

    @pytest.mark.parametrize("seed", range(5))
    def test_pinv_form(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 21))
        p = S2.admissible(int(rng.integers(1, n + 1)))
        x = torus_points(n, seed=seed + 100)
        y = rng.standard_normal(n)
        t = np.linspace(0, 1, 257)[:, None]
        np.testing.assert_allclose(
            least_squares_fit(S2, x, p, y)(t), pinv_kernel_fit(S2, x, p, y)(t), atol=1e-8
        )

    def test_pinv_kernel_expansion(self):
        # the raw kernel sum agrees up to cond(K_p) eps on a well-spread set
        x = ((np.arange(12) + 0.3 * np.random.default_rng(0).random(12)) / 12)[:, None]
        y = np.cos(2 * np.pi * x[:, 0])
        t = np.linspace(0, 1, 257)[:, None]
        g = pinv_kernel_fit(S1, x, 7, y)
        want = least_squares_fit(S1, x, 7, y)(t)
        assert g.cond < 1e6
        np.testing.assert_allclose(g.eval_kernel_form(t), want, atol=1e-9)

    def test_p_above_n_rejected(self):
        with pytest.raises(ValueError):
            least_squares_fit(S1, torus_points(3), 5, np.zeros(3))


class TestGram:
    def test_weyl_bound(self):
        x = torus_points(12, seed=15)
        lam_ref = assemble(S2, x, None).lambda_min
        for p in (13, 25, 51, 101):
            lam = assemble(S2, x, p).lambda_min
            assert lam >= lam_ref - 12 * tail_bound(S2, p) - 1e-14

    def test_spectrum(self):
        g = assemble(S1, torus_points(5, seed=16), 31)
        assert g.n == 5 and g.rank == 5
        assert g.cond == pytest.approx(g.lambda_max / g.lambda_min)


class TestNearOptimal:
    def coefs(self, p=301):
        c = 0.75 ** np.abs(S2.labels(p)[:, 0]).astype(float)
        return SeriesFunction(S2, c)

    def test_interpolates_and_improves(self):
        f = self.coefs()
        x = torus_points(8, seed=17)
        t = np.linspace(0, 1, 1024)[:, None]
        prev = math.inf
        for p in (15, 31, 63):
            g = near_optimal_interpolant(S2, x, f, p)
            np.testing.assert_allclose(g(x), f(x), atol=1e-9)
            err = math.sqrt(np.mean((f(t) - g(t)) ** 2))
            assert err >= f.projection_residual(g.p) - 1e-12
            assert err < prev
            prev = err

    def test_series_helpers(self):
        f = SeriesFunction(S1, np.array([1.0, 2.0, 3.0]))
        np.testing.assert_array_equal(f.truncated(5), [1, 2, 3, 0, 0])
        assert f.projection_residual(1) == pytest.approx(math.sqrt(13))
        assert f(np.array([[0.0]]))[0] == pytest.approx(1 + 3 * math.sqrt(2))
