"""L^q errors on the torus and sphere, and per-p error curves."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import sphere, torus
from .basis import BasisSpec
from .errors import IllConditionedError, RankDeficientError
from .interpolate import (
    Interpolant,
    SampleSet,
    kernel_interpolant,
    least_squares_fit,
    min_norm_interpolant,
)

INF = math.inf
MC_SAMPLES = 200_000
SUP_PROBES = 20_000
_FIELD = {1: "E1", 2: "E2", INF: "Einf"}


def _max_frequency(*funcs) -> int | None:
    out = 0
    for f in funcs:
        if isinstance(f, Interpolant):
            k = f.max_frequency
            if k is None:
                return None
            out = max(out, k)
    return out


def default_resolution(spec: BasisSpec, *funcs) -> int:
    """Per-axis torus grid size ``max(512, 8 * max frequency)``.

    Kernel interpolants (no finite frequency support) on T^1 get 4096 points.
    """
    d = spec.d
    k = _max_frequency(*funcs)
    if k is None:
        return 4096 if d == 1 else (512 if d == 2 else 64)
    if d <= 2:
        return max(512, 8 * k)
    return max(64, 4 * k)


def grid_values(func, spec: BasisSpec, m: int) -> np.ndarray:
    """Values of ``func`` on the torus grid of ``quadrature_grid(d, m)``.

    Interpolants take fast paths where one applies: FFT for T^1 coefficient
    expansions and separable products for the mixed-Sobolev kernel limit.
    """
    d = spec.d
    if isinstance(func, Interpolant):
        if d == 1 and func.coefficients is not None:
            return func.on_grid(m)
        if (
            func.p is None
            and func.coefficients is None
            and spec.weights.kind == "mixed-sobolev"
            and d == 2
        ):
            axis = np.arange(m) / m
            c = func.kernel_coefficients
            K0 = torus.sobolev_kernel_limit(axis[:, None] - func.centers[None, :, 0], spec.weights.s, 1)
            K1 = torus.sobolev_kernel_limit(axis[:, None] - func.centers[None, :, 1], spec.weights.s, 1)
            return ((K0 * c[None, :]) @ K1.T).reshape(-1)
    pts, _ = torus.quadrature_grid(d, m)
    return np.asarray(func(pts), dtype=float).reshape(-1)


def _reduce(diff: np.ndarray, q) -> float:
    a = np.abs(diff)
    if q == 1:
        return float(np.mean(a))
    if q == 2:
        return float(np.sqrt(np.mean(a * a)))
    return float(np.max(a))


def _check_q(q):
    if q not in (1, 2, INF):
        raise ValueError(f"q must be 1, 2 or inf, got {q!r}")


def error_q(f, g, q, spec: BasisSpec, *, resolution: int | None = None, seed: int = 0, return_se: bool = False):
    """``||f - g||`` in ``L^q`` of the normalized measure on the domain.

    Torus: tensor-grid quadrature for ``q`` in {1, 2} and the grid maximum
    for ``q = inf``.  Sphere: Monte Carlo with ``resolution`` samples
    (default 2e5) for ``q`` in {1, 2}, Fibonacci-probe maximum (2e4 by
    default, ``d = 3``) for ``q = inf``.  With ``return_se`` a
    ``(value, standard_error)`` pair is returned (0 for deterministic rules).

    Raises ``ValueError`` when the grid would exceed the resolution budget.
    """
    val, se = errors_q(f, g, (q,), spec, resolution=resolution, seed=seed)[q]
    return (val, se) if return_se else val


def errors_q(f, g, q_list, spec: BasisSpec, *, resolution: int | None = None, seed: int = 0) -> dict:
    """Several norms of ``f - g`` sharing one set of evaluations.

    Returns ``{q: (value, standard_error)}``.
    """
    for q in q_list:
        _check_q(q)
    out = {}
    if spec.domain == "torus":
        m = resolution or default_resolution(spec, f, g)
        if m**spec.d > torus.GRID_BUDGET:
            raise ValueError(f"resolution budget exceeded: {m}^{spec.d} > {torus.GRID_BUDGET}")
        diff = grid_values(f, spec, m) - grid_values(g, spec, m)
        return {q: (_reduce(diff, q), 0.0) for q in q_list}

    if INF in q_list:
        npr = resolution or SUP_PROBES
        if spec.d == 3:
            P = sphere.fibonacci_sphere(npr)
        else:
            P = sphere.uniform_sphere(npr, spec.d, np.random.default_rng(seed))
        out[INF] = (_reduce(np.asarray(f(P)) - np.asarray(g(P)), INF), 0.0)
    finite = [q for q in q_list if q != INF]
    if finite:
        N = resolution or MC_SAMPLES
        P = sphere.uniform_sphere(N, spec.d, np.random.default_rng(seed))
        a = np.abs(np.asarray(f(P)) - np.asarray(g(P)))
        for q in finite:
            if q == 1:
                out[q] = (float(np.mean(a)), float(np.std(a, ddof=1) / math.sqrt(N)))
            else:
                val = math.sqrt(float(np.mean(a * a)))
                se = float(np.std(a * a, ddof=1) / math.sqrt(N)) / (2.0 * val) if val > 0 else 0.0
                out[q] = (val, se)
    return out


@dataclass
class ErrorRecord:
    p: int | None
    regime: str
    E1: float = math.nan
    E2: float = math.nan
    Einf: float = math.nan
    cond: float = math.nan
    hX: float = math.nan
    qX: float = math.nan
    seed: object = None
    status: str = "ok"

    def error(self, q) -> float:
        return getattr(self, _FIELD[q])


@dataclass
class ErrorCurve:
    """Per-p errors of one sample set (or their mean over realizations).

    ``records`` are sorted by strictly increasing ``p``; the p = inf kernel
    row, when present, is kept apart in ``reference``.
    """

    spec: str
    n: int
    records: list = field(default_factory=list)
    reference: ErrorRecord | None = None

    @property
    def p(self) -> np.ndarray:
        return np.array([r.p for r in self.records])

    def errors(self, q) -> np.ndarray:
        return np.array([r.error(q) for r in self.records])

    def regimes(self) -> list:
        return [r.regime for r in self.records]


def aggregate(curves: list) -> ErrorCurve:
    """Mean over realizations, row by row; failed rows are left out of each mean."""
    if not curves:
        raise ValueError("nothing to aggregate")
    first = curves[0]
    out = ErrorCurve(first.spec, first.n)
    rows = list(zip(*[c.records for c in curves]))
    if first.reference is not None:
        rows.append(tuple(c.reference for c in curves))
    for i, group in enumerate(rows):
        good = [r for r in group if r.status in ("ok", "fallback")]
        rec = ErrorRecord(group[0].p, group[0].regime, status="ok" if good else "failed")
        for name in ("E1", "E2", "Einf", "cond", "hX", "qX"):
            vals = [getattr(r, name) for r in good]
            setattr(rec, name, float(np.mean(vals)) if vals else math.nan)
        if first.reference is not None and i == len(rows) - 1:
            out.reference = rec
        else:
            out.records.append(rec)
    return out


def default_p_list(spec: BasisSpec, n: int, *, p_max: int | None = None) -> list:
    """Every admissible p up to ``4 n``, then doubling up to ``p_max``.

    ``p_max`` defaults to ``64 n``, further capped at P* on the sphere.  The
    torus reference row is the exact kernel limit, so no P* cap is applied
    there (P* can fall below ``n`` for large ``s``).
    """
    top = p_max if p_max is not None else 64 * n
    if spec.domain == "sphere" and spec.compatible:
        top = min(top, spec.reference_p)
    out = []
    p = spec.admissible(1)
    while p <= min(4 * n, top):
        out.append(p)
        p = spec.next_admissible(p)
    q = out[-1] if out else 1
    while 2 * q <= top:
        q = spec.admissible(2 * q)
        if q > out[-1]:
            out.append(q)
    return out


def _status_of(exc) -> str:
    if isinstance(exc, RankDeficientError):
        return "rank-deficient"
    if isinstance(exc, IllConditionedError):
        return "ill-conditioned"
    return "failed"


def sweep_errors(
    spec: BasisSpec,
    X: SampleSet,
    f,
    p_list,
    q_list=(1, 2, INF),
    *,
    reference: bool = True,
    resolution: int | None = None,
    fallback: bool = True,
    seed=None,
    regime_split: int | None = None,
) -> ErrorCurve:
    """Error of the fit at each ``p`` against the target ``f``.

    ``p <= n`` uses least squares and ``p > n`` the minimum-norm interpolant
    (override the split with ``regime_split``).  Solver failures become rows
    with a failure status.  With ``reference`` and compatible weights, the
    kernel interpolant is appended as the ``reference`` row.
    """
    for q in q_list:
        _check_q(q)
    n = len(X)
    split = n if regime_split is None else regime_split
    ps = [spec.admissible(int(p)) for p in p_list]
    if any(b <= a for a, b in zip(ps, ps[1:])):
        raise ValueError("p-list must be strictly increasing after alignment")
    hX = X.mesh_norm
    qX = X.separation_radius if n > 1 else INF
    curve = ErrorCurve(spec.describe(), n)

    def row(fit, p, regime):
        rec = ErrorRecord(p, regime, hX=hX, qX=qX, seed=seed)
        try:
            g = fit()
        except (np.linalg.LinAlgError, ValueError) as exc:
            rec.status = _status_of(exc)
            return rec
        rec.cond, rec.status = g.cond, g.status
        for q, (val, _) in errors_q(f, g, q_list, spec, resolution=resolution).items():
            setattr(rec, _FIELD[q], val)
        return rec

    for p in ps:
        if p <= split:
            curve.records.append(row(lambda: least_squares_fit(spec, X, p), p, "LS"))
        else:
            curve.records.append(
                row(lambda: min_norm_interpolant(spec, X, p, fallback=fallback), p, "min-norm")
            )
    if reference and spec.compatible:
        curve.reference = row(lambda: kernel_interpolant(spec, X, fallback=fallback), None, "kernel")
    return curve
