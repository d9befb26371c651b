"""Randomized invariants checked with hypothesis."""

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from minnorm import torus
from minnorm.basis import BasisSpec, kernel_matrix, tail_bound
from minnorm.interpolate import interp_tol, kernel_interpolant, least_squares_fit, min_norm_interpolant, pinv_kernel_fit
from minnorm.sampling import SamplingPlan, generate, mesh_norm, separation_radius

SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])

seeds = st.integers(0, 2**32 - 1)
orders = st.sampled_from([1.0, 1.5, 2.0, 3.0])


def spread_points(n, seed):
    # uniform points, rejecting sets too clustered for a 1e12 condition cap
    rng = np.random.default_rng(seed)
    while True:
        x = rng.random((n, 1))
        if n < 2 or separation_radius(x, "torus") > 0.1 / n**2:
            return x


@SETTINGS
@given(n=st.integers(1, 12), extra=st.integers(0, 40), s=orders, seed=seeds)
def test_min_norm_interpolates(n, extra, s, seed):
    spec = BasisSpec.torus_sobolev(1, s)
    x = spread_points(n, seed)
    y = np.random.default_rng(seed + 1).standard_normal(n)
    p = spec.admissible(n + extra + 1)
    f = min_norm_interpolant(spec, x, p, y, fallback=True)
    assert np.max(np.abs(f(x) - y)) <= interp_tol(y)


@SETTINGS
@given(n=st.integers(2, 15), seed=seeds, data=st.data())
def test_ls_pinv_identity(n, seed, data):
    spec = BasisSpec.torus_sobolev(1, 1.0)
    x = spread_points(n, seed)
    y = np.random.default_rng(seed).standard_normal(n)
    p = spec.admissible(data.draw(st.integers(1, n)))
    t = np.linspace(0, 1, 65)[:, None]
    a = least_squares_fit(spec, x, p, y)(t)
    b = pinv_kernel_fit(spec, x, p, y)(t)
    assert np.max(np.abs(a - b)) <= 1e-8 * (1 + np.max(np.abs(a)))


@SETTINGS
@given(s=orders, p=st.integers(1, 400), seed=seeds)
def test_truncation_within_tail(s, p, seed):
    spec = BasisSpec.torus_sobolev(1, s)
    p = spec.admissible(p)
    x = np.random.default_rng(seed).random((6, 1))
    diff = np.abs(kernel_matrix(spec, None, x) - kernel_matrix(spec, p, x))
    assert diff.max() <= tail_bound(spec, p) + 1e-13


@SETTINGS
@given(n=st.integers(2, 30), d=st.integers(1, 2), seed=seeds)
def test_mesh_dominates_separation(n, d, seed):
    x = generate(SamplingPlan("torus", d, "uniform-random", n, seed=seed))
    assert mesh_norm(x, "torus") >= separation_radius(x, "torus") - 1e-12


@SETTINGS
@given(n=st.integers(1, 10), seed=seeds)
def test_kernel_interpolant_is_green_solve(n, seed):
    spec = BasisSpec.torus_sobolev(1, 1.0)
    x = spread_points(n, seed)
    y = np.random.default_rng(seed).standard_normal(n)
    G = torus.green_kernel_1d(x - x.T)
    c = np.linalg.solve(G, y)
    t = np.linspace(0, 1, 33)
    want = torus.green_kernel_1d(t[:, None] - x[:, 0][None, :]) @ c
    got = kernel_interpolant(spec, x, y)(t[:, None])
    assert np.max(np.abs(got - want)) <= 1e-9 * (1 + np.max(np.abs(want)))


@SETTINGS
@given(seed=seeds, shift=st.floats(-3, 3))
def test_kernel_translation_invariant(seed, shift):
    spec = BasisSpec.torus_sobolev(1, 2.0)
    x = np.random.default_rng(seed).random((5, 1))
    np.testing.assert_allclose(kernel_matrix(spec, 21, x + shift), kernel_matrix(spec, 21, x), atol=1e-12)
