"""Trigonometric basis, metric and kernels on the torus T^d = [0, 1)^d.

The real basis pairs each frequency ``k`` with ``-k``: the member whose
leading nonzero coordinate is positive carries ``sqrt(2) cos(2 pi k.x)`` and
its partner carries ``sqrt(2) sin(2 pi k.x)``.  Pairs occupy adjacent
ordinals, so admissible truncations are ``p = 1, 3, 5, ...``.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special

TWO_PI = 2.0 * np.pi
SQRT2 = math.sqrt(2.0)

# quadrature grids larger than this many points are refused
GRID_BUDGET = 2**24


def as_points(x, d: int) -> np.ndarray:
    """Return ``x`` as an ``(n, d)`` float array reduced to [0, 1)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1, 1)
    elif x.ndim == 1:
        x = x.reshape(-1, 1) if d == 1 else x.reshape(1, -1)
    if x.shape[-1] != d:
        raise ValueError(f"expected points with {d} coordinates, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("torus points must be finite")
    x = np.mod(x, 1.0)
    # mod can round 1 - tiny up to exactly 1.0
    x[x >= 1.0] = 0.0
    return x


def wrap(t):
    """Reduce differences to the symmetric representative in [-1/2, 1/2)."""
    t = np.asarray(t, dtype=float)
    return t - np.floor(t + 0.5)


def torus_distance(x, y) -> np.ndarray | float:
    """Geodesic (flat) distance on the torus.

    ``x`` and ``y`` broadcast against each other along the leading axes; the
    last axis holds coordinates.  Scalars are treated as points of T^1.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim == 0 and y.ndim == 0:
        return float(abs(wrap(x - y)))
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    diff = wrap(x - y)
    out = np.sqrt(np.sum(diff * diff, axis=-1))
    return float(out) if out.ndim == 0 else out


def pairwise_distance(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Matrix of torus distances between rows of ``x`` and rows of ``y``."""
    return torus_distance(x[:, None, :], y[None, :, :])


# --------------------------------------------------------------------------
# enumeration of frequencies


def shell_size(d: int, j: int) -> int:
    """Number of k in Z^d with max-norm exactly ``j``."""
    if j == 0:
        return 1
    return (2 * j + 1) ** d - (2 * j - 1) ** d


def _leading_sign(k: np.ndarray) -> np.ndarray:
    """Sign of the first nonzero coordinate of each row (0 for k = 0)."""
    nz = k != 0
    first = np.argmax(nz, axis=1)
    lead = k[np.arange(k.shape[0]), first]
    return np.sign(lead)


@lru_cache(maxsize=64)
def _shell(d: int, j: int) -> np.ndarray:
    """Labels of shell ``j`` in paired order (negative member first)."""
    if j == 0:
        return np.zeros((1, d), dtype=np.int64)
    axes = [np.arange(-j, j + 1)] * d
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    # meshgrid with "ij" already yields lexicographic order
    grid = grid[np.max(np.abs(grid), axis=1) == j]
    neg = grid[_leading_sign(grid) < 0]
    out = np.empty((2 * neg.shape[0], d), dtype=np.int64)
    out[0::2] = neg
    out[1::2] = -neg
    out.setflags(write=False)
    return out


def frequencies(d: int, p: int) -> np.ndarray:
    """First ``p`` labels of the paired ascending max-norm enumeration.

    Returns an ``(p, d)`` integer array.  Within a shell, labels follow the
    lexicographic order of the negative member of each {k, -k} pair, with
    the positive member immediately after it.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if d == 1:
        o = np.arange(p)
        j = (o + 1) // 2
        return np.where(o % 2 == 1, -j, j).reshape(-1, 1).astype(np.int64)
    chunks = []
    left = p
    j = 0
    while left > 0:
        sh = _shell(d, j)
        chunks.append(sh[:left])
        left -= sh.shape[0]
        j += 1
    return np.concatenate(chunks, axis=0)


def ordinals_through_shell(d: int, j: int) -> int:
    """Ordinal count covering every frequency with max-norm <= ``j``."""
    return (2 * j + 1) ** d


def admissible_p(p: int) -> int:
    """Largest pair-aligned truncation not exceeding ``p`` (odd, >= 1)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return p if p % 2 == 1 else p - 1


def trig_basis(labels: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate the real basis: returns a ``(len(labels), len(x))`` matrix."""
    labels = np.atleast_2d(np.asarray(labels, dtype=np.int64))
    x = np.atleast_2d(x)
    sign = _leading_sign(labels)
    kpos = labels * np.where(sign < 0, -1, 1)[:, None]
    phase = TWO_PI * (kpos.astype(float) @ x.T)
    out = np.where((sign > 0)[:, None], SQRT2 * np.cos(phase), SQRT2 * np.sin(phase))
    out[sign == 0] = 1.0
    return out


# --------------------------------------------------------------------------
# weights


def isotropic_weight(labels: np.ndarray, s: float) -> np.ndarray:
    k2 = np.sum(np.asarray(labels, dtype=float) ** 2, axis=-1)
    return (1.0 + 4.0 * np.pi**2 * k2) ** s


def mixed_weight(labels: np.ndarray, s: float) -> np.ndarray:
    k = np.asarray(labels, dtype=float)
    return np.prod((1.0 + 4.0 * np.pi**2 * k * k) ** s, axis=-1)


# --------------------------------------------------------------------------
# closed forms and limit kernels


def green_kernel_1d(t):
    """Exact sum of the s = 1 isotropic series on T^1.

    ``sum_k (1 + 4 pi^2 k^2)^-1 e^{2 pi i k t} = cosh(1/2 - |t|) / (2 sinh(1/2))``
    with ``t`` reduced to [-1/2, 1/2).
    """
    t = np.abs(wrap(t))
    return np.cosh(0.5 - t) / (2.0 * np.sinh(0.5))


def _bessel_potential(r: np.ndarray, s: float, d: int) -> np.ndarray:
    """Inverse Fourier transform of ``(1 + 4 pi^2 |xi|^2)^-s`` on R^d at radius r."""
    nu = s - d / 2.0
    if nu <= 0:
        raise ValueError("Bessel potential is unbounded at the origin for s <= d/2")
    const = 1.0 / (2.0 ** (d / 2.0 + s - 1.0) * np.pi ** (d / 2.0) * special.gamma(s))
    r = np.asarray(r, dtype=float)
    half = nu - 0.5
    if abs(half - round(half)) < 1e-12 and round(half) >= 0:
        # half-integer order: r^nu K_nu(r) = sqrt(pi/2) e^-r * poly(r)
        m = int(round(half))
        poly = np.zeros_like(r)
        for j in range(m + 1):
            c = math.factorial(m + j) / (math.factorial(j) * math.factorial(m - j) * 2.0**j)
            poly = poly + c * r ** (m - j)
        return const * math.sqrt(np.pi / 2.0) * np.exp(-r) * poly
    out = np.empty_like(r)
    small = r < 1e-15
    out[small] = 2.0 ** (nu - 1.0) * special.gamma(nu)
    rr = r[~small]
    out[~small] = rr**nu * special.kv(nu, rr)
    return const * out


# the Bessel potential decays like r^(nu - 1/2) e^-r; 48 periods push the
# lattice remainder far below double precision for the weights in use
_LATTICE_RADIUS = 48


@lru_cache(maxsize=8)
def _lattice(d: int) -> np.ndarray:
    axes = [np.arange(-_LATTICE_RADIUS, _LATTICE_RADIUS + 1)] * d
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    keep = np.sqrt(np.sum(pts**2, axis=1)) <= _LATTICE_RADIUS + math.sqrt(d)
    return pts[keep].astype(float)


def _half_integer_order(s: float, d: int) -> int | None:
    half = s - d / 2.0 - 0.5
    if abs(half - round(half)) < 1e-12 and round(half) >= 0:
        return int(round(half))
    return None


@lru_cache(maxsize=16)
def _power_sums(m: int) -> np.ndarray:
    # T_i = sum_{n >= 0} n^i e^-n for i = 0..m
    n = np.arange(80, dtype=float)
    z = np.exp(-n)
    return np.array([np.sum(n**i * z) for i in range(m + 1)])


def _periodized_1d(t: np.ndarray, s: float) -> np.ndarray:
    """Lattice sum of the half-integer-order potential on T^1 in closed form.

    With ``G(r) = e^-r poly(r)``, ``sum_n G(|t + n|) = S(t) + S(1 - t)`` where
    ``S(a) = sum_{n >= 0} G(a + n)`` expands into the power sums ``T_i``.
    """
    m = _half_integer_order(s, 1)
    const = 1.0 / (2.0 ** (0.5 + s - 1.0) * np.pi**0.5 * special.gamma(s)) * math.sqrt(np.pi / 2.0)
    T = _power_sums(m)
    # poly(r) = sum_j c_j r^(m - j)
    pc = [math.factorial(m + j) / (math.factorial(j) * math.factorial(m - j) * 2.0**j) for j in range(m + 1)]

    def S(a):
        acc = np.zeros_like(a)
        for j, c in enumerate(pc):
            k = m - j
            for i in range(k + 1):
                acc = acc + c * math.comb(k, i) * a ** (k - i) * T[i]
        return np.exp(-a) * acc

    u = np.mod(t, 1.0)
    return const * (S(u) + S(1.0 - u))


def sobolev_kernel_limit(t, s: float, d: int, *, chunk: int = 4096) -> np.ndarray:
    """Full isotropic Sobolev series ``sum_k (1+4pi^2|k|^2)^-s e^{2 pi i k.t}``.

    Evaluated by Poisson summation of the Bessel potential over the integer
    lattice, which converges geometrically.  ``t`` has shape ``(..., d)``.
    On T^1 with half-integer Bessel order the lattice sum is done in closed
    form.
    """
    t = np.asarray(t, dtype=float)
    if d == 1 and (t.ndim == 0 or t.shape[-1] != 1):
        t = t[..., None]
    if d == 1 and _half_integer_order(s, 1) is not None:
        return _periodized_1d(t[..., 0], s)
    shape = t.shape[:-1]
    flat = wrap(t.reshape(-1, d))
    lat = _lattice(d)
    out = np.empty(flat.shape[0])
    step = max(1, chunk * 128 // lat.shape[0])
    for a in range(0, flat.shape[0], step):
        blk = flat[a : a + step]
        r = np.sqrt(np.sum((blk[:, None, :] + lat[None, :, :]) ** 2, axis=-1))
        out[a : a + step] = np.sum(_bessel_potential(r, s, d), axis=1)
    return out.reshape(shape)


def mixed_kernel_limit(t, s: float, d: int) -> np.ndarray:
    """Full mixed Sobolev series: the product of one-dimensional limits."""
    t = np.asarray(t, dtype=float)
    if t.shape[-1] != d:
        raise ValueError("last axis must hold the d coordinates")
    out = np.ones(t.shape[:-1])
    for j in range(d):
        out = out * sobolev_kernel_limit(t[..., j], s, 1)
    return out


def quadrature_grid(d: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor grid of ``m**d`` equispaced nodes with uniform weights ``m**-d``.

    Exact in L^2 for trigonometric polynomials of per-axis degree < m/2.
    """
    if m < 2:
        raise ValueError("need at least two points per axis")
    if m**d > GRID_BUDGET:
        raise ValueError(f"grid of {m}^{d} points exceeds budget {GRID_BUDGET}")
    axis = np.arange(m) / m
    pts = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    return pts, np.full(pts.shape[0], float(m) ** -d)


def eval_coefficients_on_grid(labels: np.ndarray, coef: np.ndarray, m: int) -> np.ndarray:
    """Evaluate ``sum_j coef_j phi_j`` at the d = 1 grid ``{i/m}`` by FFT."""
    labels = np.asarray(labels).reshape(-1)
    kmax = int(np.max(np.abs(labels))) if labels.size else 0
    if 2 * kmax >= m:
        raise ValueError("grid too coarse for the requested frequencies")
    # f(x) = sum_k c_k e^{2 pi i k x} with complex c built from cos/sin pairs
    coef = np.asarray(coef, dtype=float)
    spec = np.zeros(m, dtype=complex)
    zero = labels == 0
    pos = labels > 0
    neg = labels < 0
    spec[0] += np.sum(coef[zero])
    np.add.at(spec, labels[pos], SQRT2 * coef[pos] / 2.0)
    np.add.at(spec, -labels[pos], SQRT2 * coef[pos] / 2.0)
    np.add.at(spec, -labels[neg], SQRT2 * coef[neg] / 2j)
    np.add.at(spec, labels[neg], -SQRT2 * coef[neg] / 2j)
    return np.real(np.fft.ifft(spec) * m)
