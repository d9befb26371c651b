"""Geometry, Legendre series and harmonics on the unit sphere S^{d-1}."""

from __future__ import annotations

import math

import numpy as np
from scipy import special
from scipy.spatial import cKDTree

NORM_TOL = 1e-12


def as_points(x, d: int) -> np.ndarray:
    """Return ``x`` as ``(n, d)`` unit vectors (renormalized)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[-1] != d:
        raise ValueError(f"expected points in R^{d}, got shape {x.shape}")
    nrm = np.linalg.norm(x, axis=-1, keepdims=True)
    if not np.all(np.isfinite(nrm)) or np.any(nrm == 0):
        raise ValueError("sphere points must be finite and nonzero")
    if np.any(np.abs(nrm - 1.0) > 1e-6):
        raise ValueError("point is off the unit sphere")
    return x / nrm


def sphere_area(d: int) -> float:
    """Surface measure of S^{d-1} in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def sphere_distance(x, y):
    """Great-circle distance ``arccos(x.y)`` with the inner product clamped."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    ip = np.clip(np.sum(x * y, axis=-1), -1.0, 1.0)
    out = np.arccos(ip)
    return float(out) if out.ndim == 0 else out


def degree_dimension(d: int, ell: int) -> int:
    """Dimension N_ell of degree-``ell`` spherical harmonics on S^{d-1}."""
    if ell < 0:
        raise ValueError("degree must be nonnegative")
    if ell == 0:
        return 1
    return (2 * ell + d - 2) * math.factorial(ell + d - 3) // (
        math.factorial(ell) * math.factorial(d - 2)
    )


def degree_dimensions(d: int, L: int) -> np.ndarray:
    """N_0, ..., N_L as floats (vectorized through log-gamma for large L)."""
    ell = np.arange(L + 1, dtype=float)
    out = np.ones(L + 1)
    e = ell[1:]
    out[1:] = (2 * e + d - 2) * np.exp(
        special.gammaln(e + d - 2) - special.gammaln(e + 1) - special.gammaln(d - 1)
    )
    if d == 3:
        out[1:] = 2 * e + 1
    return out


def legendre(d: int, ell: int, t):
    """d-dimensional Legendre polynomial with ``P(1) = 1``.

    Uses the recurrence
    ``(l + d - 2) P_{l+1} = (2l + d - 2) t P_l - l P_{l-1}``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + 1e-12):
        raise ValueError("legendre argument must lie in [-1, 1]")
    return legendre_table(d, ell, t)[ell]


def legendre_table(d: int, L: int, t) -> np.ndarray:
    """Array of shape ``(L + 1,) + t.shape`` holding P_0(t), ..., P_L(t)."""
    if d < 3:
        raise ValueError("sphere dimension d must be at least 3")
    t = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
    out = np.empty((L + 1,) + t.shape)
    out[0] = 1.0
    if L >= 1:
        out[1] = t
    for ell in range(1, L):
        out[ell + 1] = ((2 * ell + d - 2) * t * out[ell] - ell * out[ell - 1]) / (ell + d - 2)
    return out


def zonal_series(d: int, coeffs: np.ndarray, t) -> np.ndarray:
    """Evaluate ``sum_l coeffs[l] P_l(t)`` by a running three-term recurrence.

    Memory stays proportional to ``t`` regardless of the number of degrees.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    t = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
    L = coeffs.shape[0] - 1
    prev = np.ones_like(t)
    acc = coeffs[0] * prev
    if L == 0:
        return acc
    cur = t.copy()
    acc = acc + coeffs[1] * cur
    for ell in range(1, L):
        nxt = ((2 * ell + d - 2) * t * cur - ell * prev) / (ell + d - 2)
        prev, cur = cur, nxt
        if coeffs[ell + 1] != 0.0:
            acc = acc + coeffs[ell + 1] * cur
    return acc


def real_harmonics_d3(ell: int, m: int, x) -> np.ndarray:
    """Real orthonormal spherical harmonic Y_{ell, m} on S^2, ``1 <= m <= 2 ell + 1``.

    ``m`` maps to the order ``mu = m - ell - 1``; negative orders take the sine
    part and positive orders the cosine part of the complex harmonic.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[-1] != 3:
        raise ValueError("explicit harmonics are only provided for d = 3")
    if not 1 <= m <= 2 * ell + 1:
        raise ValueError(f"order index m={m} out of range for degree {ell}")
    x = x / np.linalg.norm(x, axis=-1, keepdims=True)
    polar = np.arccos(np.clip(x[:, 2], -1.0, 1.0))
    azim = np.arctan2(x[:, 1], x[:, 0])
    mu = m - ell - 1
    y = special.sph_harm_y(ell, abs(mu), polar, azim)
    if mu == 0:
        return np.real(y)
    if mu > 0:
        return math.sqrt(2.0) * (-1) ** mu * np.real(y)
    return math.sqrt(2.0) * (-1) ** mu * np.imag(y)


def harmonics_matrix_d3(labels, x) -> np.ndarray:
    """Rows Y_{ell, m}(x) for each ``(ell, m)`` label."""
    x = np.atleast_2d(x)
    out = np.empty((len(labels), x.shape[0]))
    for i, (ell, m) in enumerate(labels):
        out[i] = real_harmonics_d3(int(ell), int(m), x)
    return out


def count_symmetric_points(x, tol: float = 1e-9) -> int:
    """Number of distinct pairs ``(x, -x)`` both present in ``x``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] < 2:
        return 0
    tree = cKDTree(x)
    hits = tree.query_ball_point(-x, r=tol, p=np.inf)
    pairs = set()
    for i, js in enumerate(hits):
        for j in js:
            if j != i:
                pairs.add((min(i, j), max(i, j)))
    return len(pairs)


def fibonacci_sphere(n: int) -> np.ndarray:
    """Fibonacci lattice of ``n`` nearly uniform points on S^2."""
    if n < 1:
        raise ValueError("n must be >= 1")
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    phi = 2.0 * math.pi * i / golden
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def uniform_sphere(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random points on S^{d-1} from normalized Gaussian vectors."""
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)
