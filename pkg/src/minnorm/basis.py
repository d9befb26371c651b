"""Ordered orthonormal bases with weights, truncated kernels and tail bounds.

A :class:`BasisSpec` fixes the domain (torus or sphere), the ordered real
basis and the weight sequence.  Truncations are restricted to pair
boundaries on the torus and degree boundaries on the sphere; any other
``p`` is rounded down by :meth:`BasisSpec.admissible`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import sphere, torus
from .errors import IncompatibleWeightsError, OffDomainError

TORUS_KINDS = ("isotropic-sobolev", "mixed-sobolev", "unit")
SPHERE_KINDS = ("sphere-power", "ntk", "unit")

# terms summed explicitly before switching to an integral remainder
_DIRECT_TERMS = 200_000


@dataclass(frozen=True)
class WeightScheme:
    """Weight family; only the parameters relevant to ``kind`` are used."""

    kind: str
    s: float = 0.0
    sigma0: float = 1.0
    sigma1: float = 1.0
    c_d: float = 1.0

    def __post_init__(self):
        if self.kind not in set(TORUS_KINDS) | set(SPHERE_KINDS):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.s < 0:
            raise ValueError("smoothness s must be nonnegative")
        if min(self.sigma0, self.sigma1, self.c_d) <= 0:
            raise ValueError("NTK parameters must be positive")


class BasisIndex(NamedTuple):
    ordinal: int
    label: tuple


@dataclass(frozen=True)
class BasisSpec:
    """Domain, ordered basis and weights.

    ``max_reference_degree`` caps the sphere reference truncation; on the
    torus the p = inf kernel is summed exactly, so no cap applies.
    """

    domain: str
    d: int
    weights: WeightScheme
    kernel_tol: float = 1e-10
    max_reference_degree: int = 256
    extra: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.domain == "torus":
            if self.d < 1:
                raise ValueError("torus dimension must be >= 1")
            if self.weights.kind not in TORUS_KINDS:
                raise ValueError(f"weight {self.weights.kind!r} is not defined on the torus")
        elif self.domain == "sphere":
            if self.d < 3:
                raise ValueError("sphere dimension d must be >= 3")
            if self.weights.kind not in SPHERE_KINDS:
                raise ValueError(f"weight {self.weights.kind!r} is not defined on the sphere")
        else:
            raise ValueError(f"unknown domain {self.domain!r}")

    # ------------------------------------------------------------------
    # convenience constructors

    @classmethod
    def torus_sobolev(cls, d: int, s: float, **kw) -> "BasisSpec":
        return cls("torus", d, WeightScheme("isotropic-sobolev", s=s), **kw)

    @classmethod
    def torus_mixed(cls, d: int, s: float, **kw) -> "BasisSpec":
        return cls("torus", d, WeightScheme("mixed-sobolev", s=s), **kw)

    @classmethod
    def sphere_power(cls, d: int, s: float, **kw) -> "BasisSpec":
        return cls("sphere", d, WeightScheme("sphere-power", s=s), **kw)

    @classmethod
    def ntk(cls, d: int, sigma0=1.0, sigma1=1.0, c_d=1.0, **kw) -> "BasisSpec":
        return cls("sphere", d, WeightScheme("ntk", sigma0=sigma0, sigma1=sigma1, c_d=c_d), **kw)

    # ------------------------------------------------------------------

    @property
    def compatible(self) -> bool:
        w = self.weights
        if w.kind == "unit":
            return False
        if w.kind == "isotropic-sobolev":
            return w.s > self.d / 2.0
        if w.kind == "mixed-sobolev":
            return w.s > 0.5
        if w.kind == "sphere-power":
            return 2.0 * w.s > self.d - 1
        return True  # ntk: growth l^d beats d - 1

    def require_compatible(self):
        if not self.compatible:
            raise IncompatibleWeightsError(
                f"{self.weights.kind} weights with s={self.weights.s} on {self.domain}({self.d})"
                " do not define a bounded kernel"
            )

    def canonical_points(self, x) -> np.ndarray:
        """Validate ``x`` and return canonical ``(n, d)`` points."""
        try:
            if self.domain == "torus":
                return torus.as_points(x, self.d)
            return sphere.as_points(x, self.d)
        except ValueError as exc:
            raise OffDomainError(str(exc)) from None

    @property
    def measure(self) -> float:
        return 1.0 if self.domain == "torus" else sphere.sphere_area(self.d)

    # ------------------------------------------------------------------
    # sphere degree bookkeeping

    def degree_included(self, ell: int) -> bool:
        if self.weights.kind != "ntk":
            return True
        return ell <= 1 or ell % 2 == 0

    def degree_weight(self, ell) -> np.ndarray:
        """omega_ell for an array of degrees (sphere only)."""
        ell = np.asarray(ell, dtype=float)
        w = self.weights
        if w.kind == "unit":
            return np.ones_like(ell)
        if w.kind == "sphere-power":
            return (1.0 + ell * (ell + self.d - 2)) ** w.s
        out = w.c_d * ell**self.d
        out = np.where(ell == 0, w.sigma0, out)
        return np.where(ell == 1, w.sigma1, out)

    def degree_coefficients(self, L: int) -> np.ndarray:
        """``N_l / omega_l / |S|`` for l = 0..L, zero on excluded degrees."""
        ell = np.arange(L + 1)
        coef = sphere.degree_dimensions(self.d, L) / self.degree_weight(ell)
        if self.weights.kind == "ntk":
            coef = np.where((ell <= 1) | (ell % 2 == 0), coef, 0.0)
        return coef / sphere.sphere_area(self.d)

    def degree_offsets(self, L: int) -> np.ndarray:
        """Cumulative ordinal count through each degree 0..L."""
        ell = np.arange(L + 1)
        n = sphere.degree_dimensions(self.d, L)
        if self.weights.kind == "ntk":
            n = np.where((ell <= 1) | (ell % 2 == 0), n, 0.0)
        return np.cumsum(n).astype(np.int64)

    def degree_for(self, p: int) -> int:
        """Largest degree L whose complete block fits in ``p`` ordinals."""
        if p < 1:
            raise ValueError("p must be >= 1")
        L = 0
        while True:
            nxt = L + 1
            while not self.degree_included(nxt):
                nxt += 1
            if self.degree_offsets(nxt)[-1] > p:
                return L
            L = nxt

    def ordinals_through_degree(self, L: int) -> int:
        return int(self.degree_offsets(L)[-1])

    # ------------------------------------------------------------------

    def admissible(self, p: int) -> int:
        """Round ``p`` down to the nearest pair or degree boundary."""
        if self.domain == "torus":
            return torus.admissible_p(int(p))
        return self.ordinals_through_degree(self.degree_for(int(p)))

    def next_admissible(self, p: int) -> int:
        """Smallest admissible truncation strictly above ``p``."""
        if self.domain == "torus":
            return torus.admissible_p(int(p)) + 2 if p >= 1 else 1
        if p < 1:
            return 1
        L = self.degree_for(int(p)) + 1
        while not self.degree_included(L):
            L += 1
        return self.ordinals_through_degree(L)

    def labels(self, p: int) -> np.ndarray:
        """Labels of the first ``p`` basis elements as an integer array."""
        if p < 1:
            raise ValueError("p must be >= 1")
        if self.domain == "torus":
            return torus.frequencies(self.d, int(p))
        out = []
        ell = 0
        while len(out) < p:
            if self.degree_included(ell):
                for m in range(1, sphere.degree_dimension(self.d, ell) + 1):
                    out.append((ell, m))
                    if len(out) == p:
                        break
            ell += 1
        return np.array(out, dtype=np.int64)

    def weight_values(self, p: int) -> np.ndarray:
        """omega for the first ``p`` ordinals."""
        lab = self.labels(p)
        kind = self.weights.kind
        if self.domain == "torus":
            if kind == "isotropic-sobolev":
                return torus.isotropic_weight(lab, self.weights.s)
            if kind == "mixed-sobolev":
                return torus.mixed_weight(lab, self.weights.s)
            return np.ones(lab.shape[0])
        return self.degree_weight(lab[:, 0])

    def basis_matrix(self, p: int, x) -> np.ndarray:
        """``A_p`` with ``A[j, k] = phi_j(x_k)``, shape ``(p, n)``."""
        x = self.canonical_points(x)
        lab = self.labels(p)
        if self.domain == "torus":
            return torus.trig_basis(lab, x)
        if self.d != 3:
            raise NotImplementedError("explicit harmonics are only available for d = 3")
        return sphere.harmonics_matrix_d3(lab, x)

    @property
    def has_explicit_basis(self) -> bool:
        return self.domain == "torus" or self.d == 3

    # ------------------------------------------------------------------
    # reference truncation standing in for p = inf

    @cached_property
    def reference_degree(self) -> int:
        """Sphere degree L* where the degree tail drops below ``kernel_tol``, capped."""
        if self.domain != "sphere":
            raise AttributeError("reference_degree is defined on the sphere only")
        self.require_compatible()
        lo, hi = 0, 1
        while hi < self.max_reference_degree and _sphere_tail(self, hi) > self.kernel_tol:
            lo, hi = hi, min(2 * hi, self.max_reference_degree)
        if _sphere_tail(self, hi) > self.kernel_tol:
            return self.max_reference_degree
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _sphere_tail(self, mid) <= self.kernel_tol:
                hi = mid
            else:
                lo = mid
        return hi

    @cached_property
    def reference_p(self) -> int:
        """Ordinal count P* used as the p = inf stand-in."""
        self.require_compatible()
        if self.domain == "sphere":
            return self.ordinals_through_degree(self.reference_degree)
        J = _torus_reference_shell(self)
        if self.d == 1:
            return 2 * J + 1
        return torus.ordinals_through_shell(self.d, J)

    @property
    def reference_tail(self) -> float:
        """Tail bound actually achieved by the reference truncation."""
        if self.domain == "torus":
            return 0.0  # limit kernel is summed exactly
        return _sphere_tail(self, self.reference_degree)

    @property
    def reference_capped(self) -> bool:
        return self.domain == "sphere" and self.reference_tail > self.kernel_tol

    def describe(self) -> str:
        w = self.weights
        if w.kind == "ntk":
            par = f"sigma0={w.sigma0},sigma1={w.sigma1},c_d={w.c_d}"
        else:
            par = f"s={w.s}"
        return f"{self.domain}(d={self.d}) {w.kind}[{par}]"


# ----------------------------------------------------------------------
# spec-level operations


def enumerate_basis(spec: BasisSpec, p: int) -> list[BasisIndex]:
    """First ``p`` basis indices in canonical order."""
    lab = spec.labels(p)
    return [BasisIndex(i, tuple(int(v) for v in row)) for i, row in enumerate(lab)]


def eval_basis(spec: BasisSpec, idx, x) -> np.ndarray | float:
    """Value of the basis function ``idx`` (BasisIndex or label) at ``x``."""
    label = idx.label if isinstance(idx, BasisIndex) else tuple(np.atleast_1d(idx))
    pts = spec.canonical_points(x)
    if spec.domain == "torus":
        out = torus.trig_basis(np.array([label]), pts)[0]
    else:
        if spec.d != 3:
            raise NotImplementedError("explicit harmonics are only available for d = 3")
        ell, m = label
        out = sphere.real_harmonics_d3(ell, m, pts)
    return float(out[0]) if out.shape[0] == 1 else out


def _torus_pair_frequencies(spec: BasisSpec, p: int):
    """Positive representatives of the complete pairs in the first p ordinals."""
    lab = spec.labels(p)
    pos = lab[torus._leading_sign(lab) > 0]
    if spec.weights.kind == "isotropic-sobolev":
        w = torus.isotropic_weight(pos, spec.weights.s)
        w0 = 1.0
    elif spec.weights.kind == "mixed-sobolev":
        w = torus.mixed_weight(pos, spec.weights.s)
        w0 = 1.0
    else:
        w = np.ones(pos.shape[0])
        w0 = 1.0
    return pos, w, w0


def kernel_matrix(spec: BasisSpec, p: int | None, x, y=None, *, chunk: int = 2**22) -> np.ndarray:
    """Matrix ``K_p(x_i, y_j)``; ``p=None`` gives the p = inf kernel.

    On the torus the truncated kernel is summed as a cosine series over the
    frequency pairs; the p = inf kernel is the exact lattice-summed limit.
    On the sphere both use the addition formula (p = inf means degree L*).
    """
    x = spec.canonical_points(x)
    y = x if y is None else spec.canonical_points(y)
    if spec.domain == "torus":
        if p is None:
            spec.require_compatible()
            t = x[:, None, :] - y[None, :, :]
            if spec.weights.kind == "mixed-sobolev":
                return torus.mixed_kernel_limit(t, spec.weights.s, spec.d)
            return torus.sobolev_kernel_limit(t, spec.weights.s, spec.d)
        p = spec.admissible(p)
        pos, w, w0 = _torus_pair_frequencies(spec, p)
        out = np.full((x.shape[0], y.shape[0]), 1.0 / w0)
        if pos.shape[0] == 0:
            return out
        # cos(k.(x - y)) = cos kx cos ky + sin kx sin ky keeps memory at O(p n)
        step = max(1, chunk // max(1, x.shape[0] + y.shape[0]))
        for a in range(0, pos.shape[0], step):
            kk = pos[a : a + step].astype(float)
            px = torus.TWO_PI * (x @ kk.T)
            py = torus.TWO_PI * (y @ kk.T)
            scale = 2.0 / w[a : a + step]
            out += (np.cos(px) * scale) @ np.cos(py).T + (np.sin(px) * scale) @ np.sin(py).T
        return out
    return sphere_kernel(spec, None if p is None else spec.degree_for(p), x, y)


def sphere_kernel(spec: BasisSpec, L: int | None, x, y=None) -> np.ndarray:
    """Addition-formula kernel ``|S|^-1 sum_{l <= L} N_l / omega_l P_l(x.y)``.

    Excluded degrees (odd l >= 3 for the NTK) contribute nothing.
    ``L=None`` uses the reference degree L* and needs compatible weights.
    """
    if spec.domain != "sphere":
        raise ValueError("sphere_kernel needs a sphere BasisSpec")
    x = spec.canonical_points(x)
    y = x if y is None else spec.canonical_points(y)
    if L is None:
        spec.require_compatible()
        L = spec.reference_degree
    coef = spec.degree_coefficients(int(L))
    return sphere.zonal_series(spec.d, coef, x @ y.T)


def kernel_truncated(spec: BasisSpec, p: int, x, y) -> float:
    """Scalar ``K_p(x, y)``."""
    return float(kernel_matrix(spec, p, x, y)[0, 0])


def kernel_limit(spec: BasisSpec, x, y) -> float:
    """Scalar p = inf kernel ``K(x, y)``."""
    return float(kernel_matrix(spec, None, x, y)[0, 0])


# ----------------------------------------------------------------------
# tail bounds


def _iso_tail_1d(s: float, K: int) -> float:
    """Upper bound for ``sum_{k > K} (1 + 4 pi^2 k^2)^-s``."""
    k = np.arange(K + 1, K + 1 + _DIRECT_TERMS, dtype=float)
    direct = float(np.sum((1.0 + 4.0 * np.pi**2 * k * k) ** -s))
    top = K + _DIRECT_TERMS
    rem = (4.0 * np.pi**2) ** -s * top ** (1.0 - 2.0 * s) / (2.0 * s - 1.0)
    return direct + rem


def _torus_tail(spec: BasisSpec, p: int) -> float:
    s, d = spec.weights.s, spec.d
    p = spec.admissible(p)
    if d == 1:
        # sup over x, y of one pair term is 2 w_k^-1
        return 2.0 * _iso_tail_1d(s, (p - 1) // 2)
    # locate the shell containing ordinal p
    J = _shell_of_ordinal(d, p - 1)
    through = torus.ordinals_through_shell(d, J)
    partial = 0.0
    if through > p:
        rest = torus.frequencies(d, through)[p:]
        # rest holds whole pairs; each label contributes w^-1 to the 2 w^-1 pair term
        if spec.weights.kind == "mixed-sobolev":
            partial = float(np.sum(1.0 / torus.mixed_weight(rest, s)))
        else:
            partial = float(np.sum(1.0 / torus.isotropic_weight(rest, s)))
    if spec.weights.kind == "mixed-sobolev":
        # full 1-D sum from the exact limit kernel; inner sum bounded below
        total = float(torus.sobolev_kernel_limit(0.0, s, 1))
        inner = total - 2.0 * _iso_tail_1d(s, J)
        return partial + (total**d - inner**d)
    # isotropic: |k|_2 >= j on shell j
    j = np.arange(J + 1, J + 1 + _DIRECT_TERMS, dtype=float)
    cnt = (2 * j + 1) ** d - (2 * j - 1) ** d
    direct = float(np.sum(cnt * (1.0 + 4.0 * np.pi**2 * j * j) ** -s))
    top = J + _DIRECT_TERMS
    # shell count <= 2 d (3 j)^(d-1) for j >= 1
    rem = (
        2 * d * 3.0 ** (d - 1) * (4.0 * np.pi**2) ** -s * top ** (d - 2.0 * s) / (2.0 * s - d)
    )
    return partial + direct + rem


def _shell_of_ordinal(d: int, o: int) -> int:
    """Shell index containing zero-based ordinal ``o``."""
    J = max(0, int((round(o ** (1.0 / d)) - 1) // 2) - 1)
    while torus.ordinals_through_shell(d, J) <= o:
        J += 1
    return J


def _sphere_tail(spec: BasisSpec, L: int) -> float:
    d = spec.d
    ell = np.arange(L + 1, L + 1 + _DIRECT_TERMS, dtype=float)
    n = (2 * ell + d - 2) * np.exp(
        _gammaln(ell + d - 2) - _gammaln(ell + 1) - _gammaln(d - 1)
    )
    w = spec.degree_weight(ell)
    terms = n / w
    if spec.weights.kind == "ntk":
        terms = np.where(ell % 2 == 0, terms, 0.0)
    direct = float(np.sum(terms))
    top = L + _DIRECT_TERMS
    if spec.weights.kind == "ntk":
        c, g = spec.weights.c_d, float(d)
    else:
        c, g = 1.0, 2.0 * spec.weights.s
    # N_l <= 2 (l + d)^(d-2) / (d-2)!
    rem = (
        2.0 * (1.0 + d / top) ** (d - 2) / (math.factorial(d - 2) * c)
        * top ** (d - 1 - g) / (g - d + 1)
    )
    return (direct + rem) / sphere.sphere_area(d)


def _gammaln(x):
    from scipy.special import gammaln

    return gammaln(x)


def tail_bound(spec: BasisSpec, p: int) -> float:
    """Rigorous upper bound on ``sup_{x,y} |K(x, y) - K_p(x, y)|``."""
    spec.require_compatible()
    if spec.domain == "torus":
        return _torus_tail(spec, p)
    return _sphere_tail(spec, spec.degree_for(p))


def _torus_reference_shell(spec: BasisSpec) -> int:
    """Smallest shell J whose full truncation has tail <= kernel_tol."""
    tol = spec.kernel_tol

    def tail(J):
        p = 2 * J + 1 if spec.d == 1 else torus.ordinals_through_shell(spec.d, J)
        return _torus_tail(spec, p)

    lo, hi = 0, 1
    while tail(hi) > tol:
        lo, hi = hi, 2 * hi
        if hi > 2**62:
            raise OverflowError("reference truncation does not fit in 64 bits")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail(mid) <= tol:
            hi = mid
        else:
            lo = mid
    return hi
