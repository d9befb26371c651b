"""Sample-set generators, mesh norm and separation radius."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize
from scipy.spatial import cKDTree

from . import sphere, torus

GENERATORS = ("uniform-random", "equispaced", "fibonacci", "symmetric-augment")
MIN_GAP = 1e-12


@dataclass(frozen=True)
class SamplingPlan:
    """Recipe for a sample set.

    ``seed`` may be an int or a tuple of ints (passed to
    ``numpy.random.default_rng``).  For ``symmetric-augment``, ``pairs``
    antipodal pairs are drawn and the remaining ``n - 2 * pairs`` points
    are drawn uniformly.
    """

    domain: str
    d: int
    generator: str
    n: int
    seed: int | tuple = 0
    pairs: int = 0
    max_retries: int = 100

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}")
        if self.domain not in ("torus", "sphere"):
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")


def _rng(seed):
    if isinstance(seed, (list, tuple)):
        return np.random.default_rng(list(seed))
    return np.random.default_rng(seed)


def _draw(domain, d, n, rng):
    if domain == "torus":
        return rng.random((n, d))
    return sphere.uniform_sphere(n, d, rng)


def _close_pairs(x: np.ndarray, domain: str) -> np.ndarray:
    """Indices of points lying within MIN_GAP of an earlier point."""
    if x.shape[0] < 2:
        return np.zeros(0, dtype=int)
    tree = _tree(x, domain)
    pairs = tree.query_pairs(_chord(MIN_GAP) if domain == "sphere" else MIN_GAP, output_type="ndarray")
    return np.unique(pairs[:, 1]) if pairs.size else np.zeros(0, dtype=int)


def generate(plan: SamplingPlan) -> np.ndarray:
    """Points of the plan as an ``(n, d)`` array (deterministic per seed)."""
    n, d, dom = plan.n, plan.d, plan.domain
    if plan.generator == "equispaced":
        if dom != "torus":
            raise ValueError("equispaced sets are defined on the torus")
        m = round(n ** (1.0 / d))
        if m**d != n:
            raise ValueError(f"n={n} is not a perfect {d}-th power")
        pts, _ = torus.quadrature_grid(d, m) if m >= 2 else (np.zeros((1, d)), None)
        return pts
    if plan.generator == "fibonacci":
        if dom != "sphere" or d != 3:
            raise ValueError("fibonacci sets are provided on S^2 only")
        return sphere.fibonacci_sphere(n)

    rng = _rng(plan.seed)
    if plan.generator == "uniform-random":
        x = _draw(dom, d, n, rng)
        fresh = lambda k: _draw(dom, d, k, rng)
    else:
        if dom != "sphere":
            raise ValueError("symmetric-augment applies to sphere sets")
        k = plan.pairs
        if not 0 <= 2 * k <= n:
            raise ValueError(f"cannot place {k} antipodal pairs in {n} points")
        half = _draw(dom, d, k, rng)
        x = np.concatenate([half, -half, _draw(dom, d, n - 2 * k, rng)])
        fresh = None

    for _ in range(plan.max_retries):
        bad = _close_pairs(x, dom)
        if bad.size == 0:
            return x
        if fresh is None:
            break
        x[bad] = fresh(bad.size)
    raise RuntimeError("could not draw pairwise distinct points")


# --------------------------------------------------------------------------
# geometry


def _chord(theta):
    return 2.0 * np.sin(np.asarray(theta) / 2.0)


def _arc(chord):
    return 2.0 * np.arcsin(np.clip(np.asarray(chord) / 2.0, 0.0, 1.0))


def _tree(x: np.ndarray, domain: str) -> cKDTree:
    if domain == "torus":
        return cKDTree(np.mod(x, 1.0) % 1.0, boxsize=1.0)
    return cKDTree(x)


def separation_radius(X, domain: str) -> float:
    """Half the minimum pairwise geodesic distance (exact)."""
    x = np.atleast_2d(np.asarray(X, dtype=float))
    if x.shape[0] < 2:
        raise ValueError("separation radius needs at least two points")
    dist, _ = _tree(x, domain).query(x, k=2)
    dmin = float(np.min(dist[:, 1]))
    return 0.5 * (dmin if domain == "torus" else float(_arc(dmin)))


def mesh_norm(X, domain: str, *, return_spacing: bool = False, probes: int | None = None):
    """Covering radius ``max_y min_x d(x, y)``.

    On T^1 the value is exact (half the largest gap).  Elsewhere the
    distance-to-set is maximized over a dense probe set and the best probes
    are refined locally.  With ``return_spacing`` the probe spacing is also
    returned (0 when exact).
    """
    x = np.atleast_2d(np.asarray(X, dtype=float))
    if x.shape[0] < 1:
        raise ValueError("mesh norm needs a nonempty set")
    d = x.shape[1]
    if domain == "torus" and d == 1:
        s = np.sort(np.mod(x[:, 0], 1.0))
        gaps = np.diff(np.concatenate([s, [s[0] + 1.0]]))
        h, spacing = 0.5 * float(np.max(gaps)), 0.0
    elif domain == "torus":
        h, spacing = _torus_mesh(x, probes)
    else:
        h, spacing = _sphere_mesh(x, probes)
    return (h, spacing) if return_spacing else h


def _refine(fun, starts):
    best = -np.inf
    for z0 in starts:
        res = optimize.minimize(
            lambda z: -fun(z), z0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14}
        )
        best = max(best, -res.fun, fun(z0))
    return best


def _torus_mesh(x, probes):
    d = x.shape[1]
    m = probes or max(64, int(round(2.0 ** (18.0 / d))))
    m = min(m, int(torus.GRID_BUDGET ** (1.0 / d)))
    grid, _ = torus.quadrature_grid(d, m)
    tree = _tree(x, "torus")
    dist, _ = tree.query(grid)
    top = grid[np.argsort(dist)[-8:]]
    h = _refine(lambda z: float(tree.query(np.mod(z, 1.0))[0]), top)
    return max(h, float(np.max(dist))), math.sqrt(d) / m


def _sphere_mesh(x, probes):
    d = x.shape[1]
    npr = probes or max(10_000, 50 * x.shape[0])
    if d == 3:
        P = sphere.fibonacci_sphere(npr)
    else:
        P = sphere.uniform_sphere(npr, d, np.random.default_rng(0))
    tree = _tree(x, "sphere")
    dist, _ = tree.query(P)
    top = P[np.argsort(dist)[-8:]]

    def fun(z):
        y = z / max(np.linalg.norm(z), 1e-300)
        return float(_arc(tree.query(y)[0]))

    h = _refine(fun, top)
    spacing = math.sqrt(sphere.sphere_area(d) / npr) if d == 3 else float("nan")
    return max(h, float(np.max(_arc(dist)))), spacing
