import math

import mpmath
import numpy as np
import pytest

from minnorm import sphere
from minnorm.basis import (
    BasisSpec,
    WeightScheme,
    enumerate_basis,
    eval_basis,
    kernel_limit,
    kernel_matrix,
    kernel_truncated,
    tail_bound,
)
from minnorm.errors import IncompatibleWeightsError, OffDomainError

SPECS = [
    BasisSpec.torus_sobolev(1, 1.0),
    BasisSpec.torus_sobolev(1, 2.0),
    BasisSpec.torus_sobolev(2, 2.0),
    BasisSpec.torus_mixed(2, 1.0),
    BasisSpec.sphere_power(3, 2.0),
    BasisSpec.ntk(3),
]


def points(spec, n, seed):
    rng = np.random.default_rng(seed)
    if spec.domain == "torus":
        return rng.random((n, spec.d))
    return sphere.uniform_sphere(n, spec.d, rng)


def spec_id(spec):
    return spec.describe()


class TestEnumeration:
    def test_torus_d1(self):
        spec = BasisSpec.torus_sobolev(1, 1.0)
        assert [i.label for i in enumerate_basis(spec, 5)] == [(0,), (-1,), (1,), (-2,), (2,)]
        assert [i.label for i in enumerate_basis(spec, 1)] == [(0,)]
        assert [i.ordinal for i in enumerate_basis(spec, 5)] == list(range(5))

    def test_ntk_first_degrees(self):
        spec = BasisSpec.ntk(3)
        labs = [i.label for i in enumerate_basis(spec, 9)]
        assert [l for l, _ in labs] == [0, 1, 1, 1, 2, 2, 2, 2, 2]
        # degree 3 is skipped: the next block is degree 4
        assert enumerate_basis(spec, 10)[-1].label == (4, 1)

    @pytest.mark.parametrize("spec", SPECS, ids=spec_id)
    def test_prefix(self, spec):
        a = enumerate_basis(spec, 40)
        b = enumerate_basis(spec, 41)
        assert a == b[:40]
        assert len(set(i.label for i in b)) == 41


class TestEvalBasis:
    def test_torus_values(self):
        spec = BasisSpec.torus_sobolev(1, 1.0)
        assert eval_basis(spec, (0,), 0.731) == 1.0
        assert eval_basis(spec, (1,), 0.0) == pytest.approx(math.sqrt(2))

    def test_sphere_constant(self):
        spec = BasisSpec.sphere_power(3, 2.0)
        assert eval_basis(spec, (0, 1), [0.0, 0.6, 0.8]) == pytest.approx(1 / math.sqrt(4 * math.pi))

    def test_off_domain(self):
        spec = BasisSpec.sphere_power(3, 2.0)
        with pytest.raises(OffDomainError):
            eval_basis(spec, (0, 1), [1.0, 1.0, 1.0])


class TestWeights:
    def test_values(self):
        spec = BasisSpec.torus_sobolev(2, 1.5)
        lab = spec.labels(9)
        want = (1 + 4 * np.pi**2 * np.sum(lab**2, 1)) ** 1.5
        np.testing.assert_allclose(spec.weight_values(9), want)
        mixed = BasisSpec.torus_mixed(2, 1.0)
        np.testing.assert_allclose(
            mixed.weight_values(9), np.prod(1 + 4 * np.pi**2 * mixed.labels(9) ** 2.0, 1)
        )
        ntk = BasisSpec.ntk(3, sigma0=2.0, sigma1=3.0, c_d=0.5)
        np.testing.assert_allclose(ntk.weight_values(9), [2, 3, 3, 3] + [0.5 * 8] * 5)

    def test_compatibility_flags(self):
        assert BasisSpec.torus_sobolev(1, 0.6).compatible
        assert not BasisSpec.torus_sobolev(2, 1.0).compatible
        assert BasisSpec.torus_mixed(3, 0.6).compatible
        assert not BasisSpec.torus_mixed(2, 0.5).compatible
        assert BasisSpec.sphere_power(3, 1.01).compatible
        assert not BasisSpec.sphere_power(3, 1.0).compatible
        assert BasisSpec.ntk(5).compatible
        assert not BasisSpec("torus", 1, WeightScheme("unit")).compatible

    def test_incompatible_rejects_limit(self):
        spec = BasisSpec.torus_sobolev(1, 0.0)
        with pytest.raises(IncompatibleWeightsError):
            kernel_limit(spec, 0.1, 0.2)
        with pytest.raises(IncompatibleWeightsError):
            tail_bound(spec, 11)

    def test_bad_construction(self):
        with pytest.raises(ValueError):
            BasisSpec("torus", 1, WeightScheme("ntk"))
        with pytest.raises(ValueError):
            WeightScheme("isotropic-sobolev", s=-1)


class TestAdmissible:
    def test_torus_pairs(self):
        spec = BasisSpec.torus_sobolev(1, 1.0)
        assert [spec.admissible(p) for p in (1, 2, 3, 4, 64)] == [1, 1, 3, 3, 63]
        assert spec.next_admissible(63) == 65

    def test_ntk_degree_blocks(self):
        spec = BasisSpec.ntk(3)
        # blocks: degree 0 (1), 1 (4), 2 (9), 4 (18), 6 (31)
        assert [spec.admissible(q) for q in (1, 3, 4, 8, 9, 10, 18)] == [1, 1, 4, 4, 9, 9, 18]
        assert spec.next_admissible(9) == 18


class TestKernel:
    def test_green_limit_value(self):
        spec = BasisSpec.torus_sobolev(1, 1.0)
        assert kernel_limit(spec, 0.3, 0.3) == pytest.approx(math.cosh(0.5) / (2 * math.sinh(0.5)), rel=1e-14)
        assert kernel_limit(spec, 0.3, 0.3) == pytest.approx(1.0820, abs=5e-5)

    def test_truncated_torus_by_hand(self):
        spec = BasisSpec.torus_sobolev(1, 2.0)
        x, y = 0.13, 0.71
        want = 1 + sum(2 * math.cos(2 * math.pi * k * (x - y)) / (1 + 4 * math.pi**2 * k * k) ** 2 for k in (1, 2, 3))
        assert kernel_truncated(spec, 7, x, y) == pytest.approx(want, rel=1e-14)

    def test_sphere_diagonal(self):
        spec = BasisSpec.sphere_power(3, 2.0)
        e = [0.0, 0.0, 1.0]
        L = 5
        want = sum((2 * l + 1) / (1 + l * (l + 1)) ** 2 for l in range(L + 1)) / (4 * math.pi)
        assert kernel_truncated(spec, spec.ordinals_through_degree(L), e, e) == pytest.approx(want, rel=1e-14)

    @pytest.mark.parametrize("spec", SPECS, ids=spec_id)
    def test_symmetric(self, spec):
        x, y = points(spec, 12, 1), points(spec, 9, 2)
        p = spec.admissible(40)
        np.testing.assert_allclose(kernel_matrix(spec, p, x, y), kernel_matrix(spec, p, y, x).T, atol=1e-15)
        np.testing.assert_allclose(kernel_matrix(spec, None, x, y), kernel_matrix(spec, None, y, x).T, atol=1e-14)

    @pytest.mark.parametrize("spec", SPECS, ids=spec_id)
    def test_diagonal_monotone(self, spec):
        x = points(spec, 10, 3)
        prev = np.zeros(10)
        p = 1
        for _ in range(8):
            diag = np.diag(kernel_matrix(spec, p, x))
            assert np.all(diag >= prev - 1e-15)
            prev = diag
            p = spec.next_admissible(p)

    @pytest.mark.parametrize("spec", [s for s in SPECS if s.has_explicit_basis], ids=spec_id)
    def test_gram_paths_agree(self, spec):
        x = points(spec, 11, 4)
        p = spec.admissible(60)
        A = spec.basis_matrix(p, x)
        K = A.T @ (A / spec.weight_values(p)[:, None])
        np.testing.assert_allclose(K, kernel_matrix(spec, p, x), atol=1e-12)


class TestTail:
    def test_example_value(self):
        spec = BasisSpec.torus_sobolev(1, 1.0)
        # frequencies up to 100 use p = 201 ordinals
        oracle = 2 * mpmath.nsum(lambda k: 1 / (1 + 4 * mpmath.pi**2 * k**2), [101, mpmath.inf])
        tb = tail_bound(spec, 201)
        assert tb <= 5.07e-4
        assert tb >= float(oracle) * (1 - 1e-12)
        assert tb == pytest.approx(float(oracle), rel=1e-6)

    def test_mixed_factorized(self):
        spec = BasisSpec.torus_mixed(2, 1.0)
        J = 6
        p = (2 * J + 1) ** 2
        one = float(mpmath.nsum(lambda k: 1 / (1 + 4 * mpmath.pi**2 * k**2), [1, mpmath.inf]))
        inner = float(mpmath.nsum(lambda k: 1 / (1 + 4 * mpmath.pi**2 * k**2), [1, J]))
        total, kept = 1 + 2 * one, 1 + 2 * inner
        # everything outside the square [-J, J]^2
        assert tail_bound(spec, p) == pytest.approx(total**2 - kept**2, rel=1e-6)

    @pytest.mark.parametrize("spec", SPECS, ids=spec_id)
    def test_decreasing_and_positive(self, spec):
        ps = [spec.admissible(q) for q in (5, 20, 80, 320)]
        tb = [tail_bound(spec, p) for p in ps]
        assert all(t > 0 for t in tb)
        assert all(b <= a for a, b in zip(tb, tb[1:]))

    @pytest.mark.parametrize("spec", SPECS, ids=spec_id)
    def test_tail_dominates_truncation(self, spec):
        x, y = points(spec, 40, 5), points(spec, 40, 6)
        ref = kernel_matrix(spec, None, x, y)
        for q in (9, 40, 150):
            p = spec.admissible(q)
            diff = np.max(np.abs(ref - kernel_matrix(spec, p, x, y)))
            slack = spec.reference_tail if spec.domain == "sphere" else 0.0
            assert diff <= tail_bound(spec, p) - slack + 1e-13

    def test_reference_truncation(self):
        spec = BasisSpec.torus_sobolev(1, 3.0)
        P = spec.reference_p
        assert tail_bound(spec, P) <= spec.kernel_tol < tail_bound(spec, P - 2)
        sp = BasisSpec.sphere_power(3, 3.0)
        L = sp.reference_degree
        assert sp.reference_tail <= sp.kernel_tol
        assert tail_bound(sp, sp.ordinals_through_degree(L - 1)) > sp.kernel_tol

    def test_sphere_cap_is_reported(self):
        spec = BasisSpec.ntk(3)
        assert spec.reference_degree == spec.max_reference_degree
        assert spec.reference_capped
        assert spec.reference_tail > spec.kernel_tol
