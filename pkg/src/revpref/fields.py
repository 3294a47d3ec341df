"""Continuous-side checks at desk scale.

A smooth demand field ``p(x)`` is rationalizable when the vector field
``grad_x c(x, p(x))`` is a gradient.  For ``c = ln <x, y>`` that field is
``p(x) / <x, p(x)>``; its closed-loop sums vanish as the discretisation is
refined and it equals the gradient of the log-utility.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import InputError, as_positive_vector

__all__ = [
    "SmoothDemandField",
    "ClosedPath",
    "PathResult",
    "PotentialityReport",
    "InverseDemandReport",
    "cobb_douglas_field",
    "ces_field",
    "non_potential_field",
    "circle",
    "ellipse",
    "constant_path",
    "standard_loops",
    "discrete_path_sum",
    "potentiality_check",
    "numeric_gradient",
    "check_inverse_demand",
]

DEFAULT_N_VALUES = (100, 1000)
DEFAULT_THRESHOLD = 5e-3
DEFAULT_MIN_RATIO = 5.0
DEFAULT_STEP = 1e-5

Cost = Callable[[NDArray[np.float64], NDArray[np.float64]], float]


@dataclass(frozen=True)
class SmoothDemandField:
    """Inverse demand ``x -> p(x)``; ``evaluator`` maps a ``(k, m)`` array to prices.

    ``log_gradient`` is the analytic gradient of the log-utility when known.
    """

    evaluator: Callable[[NDArray[np.float64]], NDArray[np.float64]]
    dimension: int
    tag: str
    log_gradient: Callable[[NDArray[np.float64]], NDArray[np.float64]] | None = None

    def __call__(self, xs: ArrayLike) -> NDArray[np.float64]:
        xs = np.asarray(xs, dtype=np.float64)
        single = xs.ndim == 1
        out = self.evaluator(np.atleast_2d(xs))
        if not np.all(out > 0):
            raise InputError(f"field {self.tag} produced a nonpositive price")
        return out[0] if single else out

    def scaled(self, factor: float) -> "SmoothDemandField":
        if not factor > 0:
            raise InputError("scale factor must be positive")
        return SmoothDemandField(
            lambda xs: factor * self.evaluator(xs), self.dimension, f"{factor}*{self.tag}", self.log_gradient
        )


def _check_alpha(alpha: ArrayLike) -> NDArray[np.float64]:
    a = as_positive_vector(alpha, "exponents")
    if abs(a.sum() - 1.0) > 1e-12:
        raise InputError(f"exponents must sum to 1, got {a.sum()!r}")
    return a


def cobb_douglas_field(alpha: ArrayLike, income: float = 1.0) -> SmoothDemandField:
    """Prices supporting ``x`` under ``u = prod x_k^alpha_k``: ``p_k = alpha_k w / x_k``."""
    a = _check_alpha(alpha)
    return SmoothDemandField(
        lambda xs: income * a[None, :] / xs,
        a.size,
        f"cobb-douglas{a.tolist()}",
        lambda xs: a[None, :] / np.atleast_2d(xs),
    )


def ces_field(rho: float, weights: ArrayLike) -> SmoothDemandField:
    """Supporting prices for ``u = (sum a_k x_k^rho)^(1/rho)``: ``p_k = a_k x_k^(rho-1)``."""
    if not rho < 1 or rho == 0:
        raise InputError(f"CES needs rho < 1 and rho != 0, got {rho}")
    a = as_positive_vector(weights, "CES weights")

    def grad(xs):
        xs = np.atleast_2d(xs)
        return a * xs ** (rho - 1) / np.sum(a * xs**rho, axis=1, keepdims=True)

    return SmoothDemandField(lambda xs: a * xs ** (rho - 1), a.size, f"ces[rho={rho!r}]", grad)


def non_potential_field(dimension: int = 2) -> SmoothDemandField:
    """``p(x) = (x_1^2, x_2, ..., x_{m-1}, x_0)``: shifted coordinates, first one squared.

    ``p / <x, p>`` has nonzero curl in the ``(0, 1)`` plane, so no utility
    supports it.
    """
    if dimension < 2:
        raise InputError("a non-potential field needs dimension >= 2")

    def p(xs):
        out = np.roll(xs, -1, axis=1).copy()
        out[:, 0] = out[:, 0] ** 2
        return out

    return SmoothDemandField(p, dimension, "non-potential")


@dataclass(frozen=True)
class ClosedPath:
    """Loop ``gamma: [0, 1] -> R^m_+`` with ``gamma(0) = gamma(1)``, vectorised over ``t``."""

    gamma: Callable[[NDArray[np.float64]], NDArray[np.float64]]
    dimension: int
    name: str = "loop"

    def points(self, n: int) -> NDArray[np.float64]:
        """``gamma(i / n)`` for ``i = 0..n-1``; the closing point is ``points[0]`` itself."""
        if n < 2:
            raise InputError("a closed path needs N >= 2 points")
        pts = np.asarray(self.gamma(np.arange(n) / n), dtype=np.float64)
        if not np.all(pts > 0):
            raise InputError(f"path {self.name} leaves the positive orthant")
        return pts

    def reversed(self) -> "ClosedPath":
        return ClosedPath(lambda t: self.gamma((1.0 - t) % 1.0), self.dimension, f"reversed {self.name}")


def ellipse(center: ArrayLike, radii: tuple[float, float], plane: tuple[int, int] = (0, 1), name: str | None = None) -> ClosedPath:
    """Axis-aligned ellipse in a coordinate plane; radii are capped to stay positive."""
    c = as_positive_vector(center, "center")
    i, j = plane
    if i == j or not (0 <= i < c.size and 0 <= j < c.size):
        raise InputError(f"invalid plane {plane} for dimension {c.size}")
    ri = min(float(radii[0]), 0.9 * c[i])
    rj = min(float(radii[1]), 0.9 * c[j])

    def gamma(t):
        pts = np.tile(c, (np.size(t), 1))
        pts[:, i] += ri * np.cos(2 * np.pi * t)
        pts[:, j] += rj * np.sin(2 * np.pi * t)
        return pts

    return ClosedPath(gamma, c.size, name or f"ellipse@{c.tolist()} r=({ri:g},{rj:g}) plane={plane}")


def circle(center: ArrayLike, radius: float, plane: tuple[int, int] = (0, 1), name: str | None = None) -> ClosedPath:
    return ellipse(center, (radius, radius), plane, name)


def constant_path(point: ArrayLike) -> ClosedPath:
    x = as_positive_vector(point, "point")
    return ClosedPath(lambda t: np.tile(x, (np.size(t), 1)), x.size, f"constant@{x.tolist()}")


def standard_loops(dimension: int = 2) -> list[ClosedPath]:
    """Three fixed loops used by the convergence checks."""
    if dimension < 2:
        raise InputError("loops need dimension >= 2")

    def lift(pt):
        return list(pt) + [1.0] * (dimension - 2)

    loops = [
        circle(lift((2.0, 2.0)), 0.3),
        ellipse(lift((1.0, 1.5)), (0.5, 0.3)),
        circle(lift((3.0, 1.0)), 0.4),
    ]
    if dimension >= 3:
        loops[2] = circle([1.0, 3.0, 1.0] + [1.0] * (dimension - 3), 0.4, plane=(1, 2))
    return loops


def discrete_path_sum(path: ClosedPath, field: SmoothDemandField, n: int, cost: Cost | None = None) -> float:
    """``sum_i [c(x_{i+1}, p(x_i)) - c(x_i, p(x_i))]`` with ``x_i = gamma(i/N)``, ``x_N = x_0``."""
    x = path.points(n)
    p = field(x)
    nxt = np.roll(x, -1, axis=0)
    if cost is None:
        terms = np.log(np.einsum("ij,ij->i", nxt, p)) - np.log(np.einsum("ij,ij->i", x, p))
    else:
        terms = np.array([cost(nxt[i], p[i]) - cost(x[i], p[i]) for i in range(n)])
    return float(np.sum(terms))


@dataclass(frozen=True)
class PathResult:
    name: str
    n_values: tuple[int, ...]
    sums: tuple[float, ...]
    ratios: tuple[float, ...]
    passed: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "N": list(self.n_values),
            "sums": list(self.sums),
            "decay_ratios": [None if r == float("inf") else r for r in self.ratios],
            "passed": self.passed,
        }


@dataclass(frozen=True)
class PotentialityReport:
    field: str
    passed: bool
    threshold: float
    min_ratio: float
    paths: tuple[PathResult, ...]

    def to_dict(self) -> dict:
        return {
            "field": self.field,
            "passed": self.passed,
            "threshold": self.threshold,
            "min_ratio": self.min_ratio,
            "paths": [p.to_dict() for p in self.paths],
        }


def potentiality_check(
    field: SmoothDemandField,
    paths: Sequence[ClosedPath],
    cost: Cost | None = None,
    n_values: Sequence[int] = DEFAULT_N_VALUES,
    threshold: float = DEFAULT_THRESHOLD,
    min_ratio: float = DEFAULT_MIN_RATIO,
) -> PotentialityReport:
    """Closed-loop sums at increasing ``N``.

    A path passes when its sums are all exactly zero, or when each refinement
    shrinks ``|sum|`` by at least ``min_ratio`` and the finest ``|sum|`` is at
    most ``threshold``.
    """
    ns = tuple(sorted(int(v) for v in n_values))
    if len(ns) < 2:
        raise InputError("convergence needs at least two discretisation sizes")
    results = []
    for path in paths:
        sums = tuple(discrete_path_sum(path, field, n, cost) for n in ns)
        mags = [abs(s) for s in sums]
        ratios = tuple(
            float("inf") if mags[k + 1] == 0.0 else mags[k] / mags[k + 1] for k in range(len(mags) - 1)
        )
        if all(m == 0.0 for m in mags):
            ok = True
        else:
            ok = all(r >= min_ratio for r in ratios) and mags[-1] <= threshold
        results.append(PathResult(path.name, ns, sums, ratios, bool(ok)))
    return PotentialityReport(field.tag, all(r.passed for r in results), threshold, min_ratio, tuple(results))


def numeric_gradient(f: Callable[[NDArray[np.float64]], float], x: ArrayLike, h: float = DEFAULT_STEP) -> NDArray[np.float64]:
    """Central differences ``(f(x + h e_k) - f(x - h e_k)) / 2h``."""
    if not h > 0:
        raise InputError("step h must be positive")
    x = np.asarray(x.q if hasattr(x, "q") else x, dtype=np.float64)
    if np.any(x - h <= 0):
        raise InputError(f"central differences with h={h} leave the positive orthant at {x.tolist()}")
    g = np.empty_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (f(x + e) - f(x - e)) / (2 * h)
    return g


@dataclass(frozen=True)
class InverseDemandReport:
    field: str
    passed: bool
    max_residual: float
    points: int
    tolerance: float
    gradient: str

    def to_dict(self) -> dict:
        return {
            "field": self.field,
            "passed": self.passed,
            "max_residual": self.max_residual,
            "points": self.points,
            "tolerance": self.tolerance,
            "gradient": self.gradient,
        }


def check_inverse_demand(
    field: SmoothDemandField,
    points: ArrayLike,
    log_utility: Callable[[NDArray[np.float64]], float] | None = None,
    tolerance: float = 1e-8,
    h: float = DEFAULT_STEP,
) -> InverseDemandReport:
    """Max-norm residual of ``p(x)/<x, p(x)> - grad v(x)`` over ``points``.

    ``grad v`` comes from ``log_utility`` by central differences when given,
    otherwise from the field's analytic ``log_gradient``.
    """
    xs = np.atleast_2d(np.asarray(points, dtype=np.float64))
    p = field(xs)
    normalized = p / np.einsum("ij,ij->i", xs, p)[:, None]
    if log_utility is not None:
        grad = np.vstack([numeric_gradient(log_utility, x, h) for x in xs])
        how = f"central-difference h={h:g}"
    elif field.log_gradient is not None:
        grad = field.log_gradient(xs)
        how = "analytic"
    else:
        raise InputError(f"field {field.tag} has no analytic gradient; pass log_utility")
    resid = float(np.max(np.abs(normalized - grad)))
    return InverseDemandReport(field.tag, bool(resid <= tolerance), resid, xs.shape[0], tolerance, how)
