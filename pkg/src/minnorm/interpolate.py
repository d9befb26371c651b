"""Gram systems and minimum weighted-norm, kernel and least-squares fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from . import torus
from .basis import BasisSpec, kernel_matrix
from .errors import IllConditionedError, RankDeficientError

COND_MAX = 1e12
SOLVE_TOL = 1e-9


def interp_tol(y) -> float:
    """Interpolation tolerance ``1e-8 (1 + max|y|)``."""
    return 1e-8 * (1.0 + float(np.max(np.abs(y)))) if np.size(y) else 1e-8


@dataclass(eq=False)
class SampleSet:
    """Sample points with data values on a torus or sphere.

    Geometry (mesh norm, separation radius, symmetric-pair count) is computed
    on first access and cached.
    """

    spec: BasisSpec
    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.points = self.spec.canonical_points(self.points)
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        n = self.points.shape[0]
        if n < 1:
            raise ValueError("a sample set needs at least one point")
        if self.values.shape[0] != n:
            raise ValueError(f"{n} points but {self.values.shape[0]} values")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sample values must be finite")
        if n > 1:
            from .sampling import separation_radius

            if 2.0 * separation_radius(self.points, self.spec.domain) <= 1e-12:
                raise ValueError("sample points must be pairwise distinct")

    @classmethod
    def from_function(cls, spec: BasisSpec, points, f) -> "SampleSet":
        pts = spec.canonical_points(points)
        return cls(spec, pts, f(pts))

    def __len__(self):
        return self.points.shape[0]

    @cached_property
    def mesh_norm(self) -> float:
        from .sampling import mesh_norm

        return mesh_norm(self.points, self.spec.domain)

    @cached_property
    def separation_radius(self) -> float:
        from .sampling import separation_radius

        return separation_radius(self.points, self.spec.domain)

    @cached_property
    def symmetric_points(self) -> int:
        if self.spec.domain != "sphere":
            return 0
        from .sphere import count_symmetric_points

        return count_symmetric_points(self.points)


@dataclass(eq=False)
class GramSystem:
    """``K_p = A_p^t W A_p`` on the sample points, with its spectrum."""

    spec: BasisSpec
    p: int | None
    K: np.ndarray
    A: np.ndarray | None = None
    w_inv: np.ndarray | None = None
    eigenvalues: np.ndarray = field(init=False)

    def __post_init__(self):
        self.K = 0.5 * (self.K + self.K.T)
        self.eigenvalues = np.linalg.eigvalsh(self.K)

    @property
    def n(self) -> int:
        return self.K.shape[0]

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def cond(self) -> float:
        lo = self.lambda_min
        return math.inf if lo <= 0 else self.lambda_max / lo

    @cached_property
    def rank(self) -> int:
        """Numerical rank: of ``A_p`` when available, else of ``K_p``."""
        if self.A is not None:
            return int(np.linalg.matrix_rank(self.A))
        tol = self.n * np.finfo(float).eps * max(self.lambda_max, 0.0)
        return int(np.sum(self.eigenvalues > tol))

    def solve(self, rhs, *, cond_max: float = COND_MAX, fallback: bool = False):
        """Solve ``K c = rhs``; returns ``(c, status)``."""
        c, _, status = self.solve_full(rhs, cond_max=cond_max, fallback=fallback)
        return c, status

    def solve_full(self, rhs, *, cond_max: float = COND_MAX, fallback: bool = False):
        """Solve ``K c = rhs``; returns ``(c, W A c or None, status)``.

        With the basis matrix available the solve goes through the singular
        values of ``B = A^t W^{1/2}`` (``K = B B^t``), whose condition number
        is the square root of the Gram matrix's; otherwise a Cholesky
        factorization of ``K`` is used.  Rank-deficient or ill-conditioned
        systems (``cond > cond_max``) raise unless ``fallback`` is set, in
        which case singular values below ``max(shape) eps sigma_max`` are
        dropped and the status is ``"fallback"``.
        """
        rhs = np.asarray(rhs, dtype=float)
        if self.rank < self.n:
            if not fallback:
                raise RankDeficientError(self.rank, self.n)
            return (*self._truncated_solve(rhs), "fallback")
        if self.cond > cond_max:
            if not fallback:
                raise IllConditionedError(self.cond, cond_max)
            return (*self._truncated_solve(rhs), "fallback")
        if self.A is not None:
            return (*self._factor_solve(rhs, truncate=False), "ok")
        try:
            fac = scipy.linalg.cho_factor(self.K, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            if not fallback:
                raise IllConditionedError(self.cond, cond_max) from None
            return (*self._truncated_solve(rhs), "fallback")
        return scipy.linalg.cho_solve(fac, rhs, check_finite=False), None, "ok"

    def _factor_solve(self, rhs, truncate: bool):
        root = np.sqrt(self.w_inv)
        U, sv, Vt = np.linalg.svd(self.A.T * root[None, :], full_matrices=False)
        if truncate:
            keep = sv > max(self.A.shape) * np.finfo(float).eps * sv[0]
            U, sv, Vt = U[:, keep], sv[keep], Vt[keep]
        proj = U.T @ rhs
        return U @ (proj / sv**2), root * (Vt.T @ (proj / sv))

    def _truncated_solve(self, rhs):
        if self.A is not None:
            return self._factor_solve(rhs, truncate=True)
        lam, vec = np.linalg.eigh(self.K)
        keep = lam > self.n * np.finfo(float).eps * lam[-1]
        return vec[:, keep] @ ((vec[:, keep].T @ rhs) / lam[keep]), None


def assemble(spec: BasisSpec, X, p: int | None) -> GramSystem:
    """Gram system at truncation ``p`` (``None`` for the p = inf kernel)."""
    pts = X.points if isinstance(X, SampleSet) else spec.canonical_points(X)
    if p is None:
        return GramSystem(spec, None, kernel_matrix(spec, None, pts))
    p = spec.admissible(p)
    if spec.has_explicit_basis:
        A = spec.basis_matrix(p, pts)
        w_inv = 1.0 / spec.weight_values(p)
        return GramSystem(spec, p, A.T @ (w_inv[:, None] * A), A, w_inv)
    return GramSystem(spec, p, kernel_matrix(spec, p, pts))


@dataclass(frozen=True, eq=False)
class Interpolant:
    """A function held as basis coefficients and/or a kernel expansion.

    ``p is None`` marks the p = inf kernel interpolant.  When both
    representations are present, evaluation uses the basis coefficients.
    """

    spec: BasisSpec
    p: int | None
    coefficients: np.ndarray | None = None
    centers: np.ndarray | None = None
    kernel_coefficients: np.ndarray | None = None
    kind: str = "min-norm"
    cond: float = math.nan
    status: str = "ok"
    requested_p: int | None = None

    def __call__(self, x) -> np.ndarray:
        pts = self.spec.canonical_points(x)
        if self.coefficients is not None:
            return _eval_coefficients(self.spec, self.coefficients, pts)
        return self.eval_kernel_form(pts)

    def eval_kernel_form(self, x) -> np.ndarray:
        pts = self.spec.canonical_points(x)
        if self.kernel_coefficients is None:
            raise ValueError("interpolant has no kernel expansion")
        out = np.empty(pts.shape[0])
        step = 8192
        for a in range(0, pts.shape[0], step):
            Kx = kernel_matrix(self.spec, self.p, pts[a : a + step], self.centers)
            out[a : a + step] = Kx @ self.kernel_coefficients
        return out

    def on_grid(self, m: int) -> np.ndarray:
        """Values at the d = 1 torus grid ``{i / m}``."""
        if self.spec.domain != "torus" or self.spec.d != 1:
            raise ValueError("grid evaluation is defined on T^1 only")
        if self.coefficients is not None:
            lab = self.spec.labels(len(self.coefficients))
            kmax = int(np.max(np.abs(lab))) if lab.size else 0
            if 2 * kmax < m:
                return torus.eval_coefficients_on_grid(lab, self.coefficients, m)
        return self(np.arange(m) / m)

    @property
    def max_frequency(self) -> int | None:
        """Largest frequency carried by the torus coefficients (None for p = inf)."""
        if self.spec.domain != "torus" or self.p is None:
            return None
        lab = self.spec.labels(self.p)
        return int(np.max(np.abs(lab)))


def _eval_coefficients(spec: BasisSpec, coef: np.ndarray, pts: np.ndarray) -> np.ndarray:
    p = coef.shape[0]
    out = np.empty(pts.shape[0])
    step = max(1, 2**22 // max(p, 1))
    for a in range(0, pts.shape[0], step):
        out[a : a + step] = spec.basis_matrix(p, pts[a : a + step]).T @ coef
    return out


def _points_values(spec: BasisSpec, X, y=None):
    if isinstance(X, SampleSet):
        return X.points, X.values
    return spec.canonical_points(X), np.asarray(y, dtype=float).reshape(-1)


def min_norm_interpolant(
    spec: BasisSpec,
    X,
    p: int,
    y=None,
    *,
    cond_max: float = COND_MAX,
    fallback: bool = False,
) -> Interpolant:
    """Minimum weighted-norm interpolant from the first ``p`` basis functions.

    ``f_p(x) = sum_k K_p(x, x_k) (K_p^{-1} y)_k``; the basis coefficients are
    ``W A_p c``.  Raises :class:`RankDeficientError` when ``p`` is too small
    to interpolate and :class:`IllConditionedError` when the Gram matrix is
    beyond ``cond_max`` (unless ``fallback``).
    """
    pts, vals = _points_values(spec, X, y)
    p_used = spec.admissible(p)
    n = pts.shape[0]
    if p_used < n:
        raise RankDeficientError(p_used, n)
    gram = assemble(spec, pts, p_used)
    c, coef, status = gram.solve_full(vals, cond_max=cond_max, fallback=fallback)
    return Interpolant(
        spec,
        p_used,
        coefficients=coef,
        centers=pts,
        kernel_coefficients=c,
        kind="min-norm",
        cond=gram.cond,
        status=status,
        requested_p=int(p),
    )


SURROGATE_CAP = 2**16 - 1


def surrogate_p(spec: BasisSpec, n: int) -> int:
    """Truncation used when the p = inf Gram matrix is too ill-conditioned.

    ``max(P*, 64 n)`` capped at ``SURROGATE_CAP``: the tail-based P* alone
    can fall below ``n`` for smooth weights.
    """
    return spec.admissible(min(max(spec.reference_p, 64 * n), SURROGATE_CAP))


def kernel_interpolant(
    spec: BasisSpec, X, y=None, *, cond_max: float = COND_MAX, fallback: bool = False
) -> Interpolant:
    """Reproducing-kernel interpolant, the p = inf member of the family.

    With ``fallback`` and a Gram matrix beyond ``cond_max``, torus bases
    switch to the minimum-norm interpolant at :func:`surrogate_p`, solved
    through the singular values of ``A_p^t W^{1/2}`` (whose condition number
    is the square root of the Gram matrix's).  Other bases use a truncated
    eigen-solve of the Gram matrix.
    """
    spec.require_compatible()
    pts, vals = _points_values(spec, X, y)
    gram = assemble(spec, pts, None)
    try:
        c, status = gram.solve(vals, cond_max=cond_max, fallback=False)
    except np.linalg.LinAlgError:
        if not fallback:
            raise
        if spec.domain == "torus":
            p_sur = surrogate_p(spec, pts.shape[0])
            _, coef, _ = assemble(spec, pts, p_sur).solve_full(vals, cond_max=0.0, fallback=True)
            return Interpolant(
                spec,
                None,
                coefficients=coef,
                centers=pts,
                kind="kernel",
                cond=gram.cond,
                status="fallback",
                requested_p=p_sur,
            )
        c, status = gram.solve(vals, fallback=True)
    return Interpolant(
        spec, None, centers=pts, kernel_coefficients=c, kind="kernel", cond=gram.cond, status=status
    )


def least_squares_fit(spec: BasisSpec, X, p: int, y=None) -> Interpolant:
    """Least-squares fit from the first ``p <= n`` basis functions."""
    pts, vals = _points_values(spec, X, y)
    p_used = spec.admissible(p)
    n = pts.shape[0]
    if p_used > n:
        raise ValueError(f"least squares needs p <= n (got p={p_used}, n={n})")
    A = spec.basis_matrix(p_used, pts)
    coef, _, rank, sv = np.linalg.lstsq(A.T, vals, rcond=None)
    if rank < p_used:
        raise RankDeficientError(int(rank), p_used)
    return Interpolant(
        spec,
        p_used,
        coefficients=coef,
        centers=pts,
        kind="least-squares",
        cond=float(sv[0] / sv[-1]),
        requested_p=int(p),
    )


def pinv_kernel_fit(spec: BasisSpec, X, p: int, y=None) -> Interpolant:
    """Kernel form ``sum_k K_p(x, x_k) (K_p^+ y)_k`` of the least-squares fit.

    ``K_p^+`` is formed from the factor ``B = A_p^t W^{1/2}`` (so that
    ``K_p = B B^t``), keeping the ``p`` nonzero singular values.  The same
    factorization gives the basis coefficients ``W^{1/2} V S^{-1} U^t y``,
    which evaluation prefers: the kernel expansion itself loses about
    ``cond(K_p) eps`` relative accuracy (see :meth:`Interpolant.eval_kernel_form`).
    """
    pts, vals = _points_values(spec, X, y)
    p_used = spec.admissible(p)
    A = spec.basis_matrix(p_used, pts)
    w_inv = 1.0 / spec.weight_values(p_used)
    B = A.T * np.sqrt(w_inv)[None, :]
    U, sv, Vt = np.linalg.svd(B, full_matrices=False)
    r = int(np.sum(sv > max(B.shape) * np.finfo(float).eps * sv[0]))
    if r < min(p_used, pts.shape[0]):
        raise RankDeficientError(r, min(p_used, pts.shape[0]))
    U, sv, Vt = U[:, :r], sv[:r], Vt[:r]
    proj = U.T @ vals
    c = U @ (proj / sv**2)
    coef = np.sqrt(w_inv) * (Vt.T @ (proj / sv))
    return Interpolant(
        spec,
        p_used,
        coefficients=coef,
        centers=pts,
        kernel_coefficients=c,
        kind="least-squares",
        cond=float(sv[0] / sv[-1]) ** 2,
        requested_p=int(p),
    )


def weighted_norm(spec: BasisSpec, f: Interpolant) -> float:
    """``sqrt(sum_j omega_j fhat_j^2)``.

    A kernel expansion at finite p is converted through ``W A_p c``; at
    p = inf the norm is ``sqrt(c^t K c)``.
    """
    if f.coefficients is not None:
        coef = f.coefficients
        return float(np.sqrt(np.sum(spec.weight_values(coef.shape[0]) * coef**2)))
    if f.p is not None and spec.has_explicit_basis:
        gram = assemble(spec, f.centers, f.p)
        coef = gram.w_inv * (gram.A @ f.kernel_coefficients)
        return float(np.sqrt(np.sum(spec.weight_values(f.p) * coef**2)))
    K = kernel_matrix(spec, f.p, f.centers)
    c = f.kernel_coefficients
    return float(np.sqrt(max(c @ K @ c, 0.0)))


@dataclass(eq=False)
class SeriesFunction:
    """Target given by its coefficients in the ordered basis."""

    spec: BasisSpec
    coefficients: np.ndarray

    def __call__(self, x) -> np.ndarray:
        return _eval_coefficients(self.spec, np.asarray(self.coefficients, float), self.spec.canonical_points(x))

    def truncated(self, p: int) -> np.ndarray:
        out = np.zeros(p)
        m = min(p, len(self.coefficients))
        out[:m] = self.coefficients[:m]
        return out

    def projection_residual(self, p: int) -> float:
        """L^2 distance to the span of the first ``p`` basis functions."""
        return float(np.sqrt(np.sum(np.asarray(self.coefficients[p:]) ** 2)))

    def norm(self) -> float:
        c = np.asarray(self.coefficients, float)
        return float(np.sqrt(np.sum(self.spec.weight_values(len(c)) * c**2)))


def near_optimal_interpolant(
    spec: BasisSpec,
    X,
    f: SeriesFunction,
    p: int,
    *,
    cond_max: float = COND_MAX,
    fallback: bool = False,
) -> Interpolant:
    """Interpolant of ``f`` on ``X`` within the first ``p`` basis functions.

    Takes the L^2 projection ``h`` of ``f`` and adds the minimum-norm
    correction interpolating the residual ``f - h`` on ``X``.
    """
    pts = X.points if isinstance(X, SampleSet) else spec.canonical_points(X)
    p_used = spec.admissible(p)
    if p_used < pts.shape[0]:
        raise RankDeficientError(p_used, pts.shape[0])
    h = f.truncated(p_used)
    gram = assemble(spec, pts, p_used)
    u = f(pts) - gram.A.T @ h
    _, corr, status = gram.solve_full(u, cond_max=cond_max, fallback=fallback)
    coef = h + corr
    return Interpolant(
        spec,
        p_used,
        coefficients=coef,
        centers=pts,
        kind="near-optimal",
        cond=gram.cond,
        status=status,
        requested_p=int(p),
    )
