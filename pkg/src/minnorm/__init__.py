"""Minimum weighted-norm interpolation on the torus and the sphere.

Truncated expansions in an orthonormal basis with weights ``omega`` give a
family of interpolants ``f_p``; ``p = inf`` is the reproducing-kernel
interpolant.  The package builds these fits, measures their errors, and
runs the double-descent and rate experiments from the command line.
"""

__version__ = "0.1.0"

from .basis import (
    BasisIndex,
    BasisSpec,
    WeightScheme,
    enumerate_basis,
    eval_basis,
    kernel_limit,
    kernel_matrix,
    kernel_truncated,
    sphere_kernel,
    tail_bound,
)
from .errors import IllConditionedError, IncompatibleWeightsError, OffDomainError, RankDeficientError
from .interpolate import (
    GramSystem,
    Interpolant,
    SampleSet,
    SeriesFunction,
    assemble,
    kernel_interpolant,
    least_squares_fit,
    min_norm_interpolant,
    near_optimal_interpolant,
    pinv_kernel_fit,
    weighted_norm,
)
from .metrics import ErrorCurve, error_q, errors_q, sweep_errors
from .sampling import SamplingPlan, generate, mesh_norm, separation_radius

__all__ = [
    "BasisIndex", "BasisSpec", "WeightScheme", "enumerate_basis", "eval_basis", "kernel_limit",
    "kernel_matrix", "kernel_truncated", "sphere_kernel", "tail_bound", "IllConditionedError",
    "IncompatibleWeightsError", "OffDomainError", "RankDeficientError", "GramSystem",
    "Interpolant", "SampleSet", "SeriesFunction", "assemble", "kernel_interpolant",
    "least_squares_fit", "min_norm_interpolant", "near_optimal_interpolant", "pinv_kernel_fit",
    "weighted_norm", "ErrorCurve", "error_q", "errors_q", "sweep_errors", "SamplingPlan",
    "generate", "mesh_norm", "separation_radius",
]
