"""Built-in target functions for the experiments."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .basis import BasisSpec
from .interpolate import SeriesFunction


def _first(x):
    x = np.asarray(x, dtype=float)
    return x[:, 0] if x.ndim == 2 else x


def runge(x):
    """Runge function ``1 / (1 + 100 t^2)`` with ``t`` the coordinate centred in [-1/2, 1/2)."""
    t = np.mod(_first(x) + 0.5, 1.0) - 0.5
    return 1.0 / (1.0 + 100.0 * t * t)


def exp_sin(x):
    """``exp(sin 2 pi x_1)``: analytic and periodic."""
    return np.exp(np.sin(2.0 * np.pi * _first(x)))


def abs_sin_cubed(x):
    """``|sin pi x_1|^3``: in W^s only for s < 7/2."""
    return np.abs(np.sin(np.pi * _first(x))) ** 3


def exp_product(x):
    """``exp(sin 2 pi x_1) exp(cos 2 pi x_2)`` on T^2."""
    x = np.atleast_2d(x)
    return np.exp(np.sin(2.0 * np.pi * x[:, 0])) * np.exp(np.cos(2.0 * np.pi * x[:, 1]))


def sphere_smooth(x):
    """``x_1 + exp(x_3^2)`` on S^2; only degrees 1 and even appear."""
    x = np.atleast_2d(x)
    return x[:, 0] + np.exp(x[:, 2] ** 2)


def decay_coefficients(spec: BasisSpec, rate: float = 0.75, kmax: int = 200) -> np.ndarray:
    """Coefficients ``rate^|k|`` on cosines and ``rate^|k| / 2`` on sines (T^1)."""
    if spec.domain != "torus" or spec.d != 1:
        raise ValueError("decay series is defined on T^1")
    lab = spec.labels(2 * kmax + 1)[:, 0]
    coef = rate ** np.abs(lab).astype(float)
    coef[lab < 0] *= 0.5
    return coef


@dataclass(frozen=True)
class Target:
    name: str
    domains: tuple
    func: Callable
    note: str = ""

    def __call__(self, x):
        return self.func(x)


CATALOG = {
    "runge": Target("runge", ("torus",), runge, "kink in the derivative at t = 1/2"),
    "exp-sin": Target("exp-sin", ("torus",), exp_sin, "analytic"),
    "abs-sin-cubed": Target("abs-sin-cubed", ("torus",), abs_sin_cubed, "W^s for s < 3.5"),
    "exp-product": Target("exp-product", ("torus",), exp_product, "analytic, d = 2"),
    "sphere-smooth": Target("sphere-smooth", ("sphere",), sphere_smooth, "analytic, NTK span"),
}


def get_target(name: str, spec: BasisSpec):
    """Catalog entry evaluable on ``spec``'s domain.

    ``decay-series`` is built from coefficients and returns a
    :class:`SeriesFunction`.
    """
    if name == "decay-series":
        return SeriesFunction(spec, decay_coefficients(spec))
    try:
        t = CATALOG[name]
    except KeyError:
        raise ValueError(f"unknown target {name!r}") from None
    if spec.domain not in t.domains:
        raise ValueError(f"target {name!r} is not defined on the {spec.domain}")
    if name == "exp-product" and spec.d != 2:
        raise ValueError("exp-product needs d = 2")
    return t
