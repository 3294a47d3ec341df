"""Domain types shared across the package.

Bundles and price vectors are strictly positive real vectors; a dataset is an
ordered list of (bundle, price) observations of a common dimension.  Costs are
always handled in the log domain, ``c(x, p) = ln b(x, p)`` where ``b`` is a
bi-homogeneous kernel (the standard inner product unless stated otherwise).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "InputError",
    "Bundle",
    "PriceVector",
    "Observation",
    "Dataset",
    "Kernel",
    "INNER",
    "weighted_inner_kernel",
    "power_kernel",
    "inner",
    "log_cost",
    "as_positive_vector",
]


class InputError(ValueError):
    """Raised for malformed or out-of-domain inputs."""


def as_positive_vector(values: ArrayLike, what: str = "vector") -> NDArray[np.float64]:
    """Return a read-only float64 copy of ``values`` after validating positivity."""
    if np.ndim(values) != 1:
        raise InputError(f"{what} must be a one-dimensional sequence")
    try:
        arr = np.array(values, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{what} is not numeric: {exc}") from None
    if arr.size < 1:
        raise InputError(f"{what} must have dimension >= 1")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{what} has non-finite coordinates: {arr.tolist()}")
    if not np.all(arr > 0):
        bad = int(np.flatnonzero(~(arr > 0))[0])
        raise InputError(f"{what} coordinate {bad} is not strictly positive ({arr[bad]!r})")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Bundle:
    """Quantities of ``m`` goods; every coordinate strictly positive."""

    q: NDArray[np.float64]

    def __init__(self, q: ArrayLike):
        object.__setattr__(self, "q", as_positive_vector(q, "bundle"))

    @property
    def dimension(self) -> int:
        return self.q.size

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Bundle) and np.array_equal(self.q, other.q)

    def __hash__(self) -> int:
        return hash(self.q.tobytes())

    def __repr__(self) -> str:
        return f"Bundle({self.q.tolist()})"


@dataclass(frozen=True, eq=False)
class PriceVector:
    """Unit prices of ``m`` goods; every coordinate strictly positive."""

    p: NDArray[np.float64]

    def __init__(self, p: ArrayLike):
        object.__setattr__(self, "p", as_positive_vector(p, "price vector"))

    @property
    def dimension(self) -> int:
        return self.p.size

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PriceVector) and np.array_equal(self.p, other.p)

    def __hash__(self) -> int:
        return hash(self.p.tobytes())

    def __repr__(self) -> str:
        return f"PriceVector({self.p.tolist()})"


@dataclass(frozen=True)
class Observation:
    index: int
    bundle: Bundle
    prices: PriceVector
    label: str | None = None

    def __post_init__(self):
        if self.bundle.dimension != self.prices.dimension:
            raise InputError(
                f"observation {self.index}: bundle has dimension {self.bundle.dimension} "
                f"but prices have dimension {self.prices.dimension}"
            )

    @property
    def name(self) -> str:
        return self.label if self.label is not None else str(self.index)


@dataclass(frozen=True, eq=False)
class Dataset:
    """An ordered, validated collection of observations.

    ``quantities`` and ``prices`` are read-only ``n x m`` views kept alongside
    the observation objects so the numerical code can work on arrays.
    """

    observations: tuple[Observation, ...]
    dimension: int
    quantities: NDArray[np.float64] = field(repr=False)
    prices: NDArray[np.float64] = field(repr=False)

    def __init__(self, observations: Sequence[Observation]):
        obs = tuple(observations)
        if not obs:
            raise InputError("a dataset needs at least one observation")
        m = obs[0].bundle.dimension
        for k, o in enumerate(obs):
            if o.index != k:
                raise InputError(f"observation indices must be 0..n-1 in order; got {o.index} at position {k}")
            if o.bundle.dimension != m:
                raise InputError(f"observation {k} has dimension {o.bundle.dimension}, expected {m}")
        q = np.vstack([o.bundle.q for o in obs])
        p = np.vstack([o.prices.p for o in obs])
        q.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "observations", obs)
        object.__setattr__(self, "dimension", m)
        object.__setattr__(self, "quantities", q)
        object.__setattr__(self, "prices", p)

    @classmethod
    def from_arrays(
        cls,
        quantities: ArrayLike,
        prices: ArrayLike,
        labels: Sequence[str] | None = None,
    ) -> "Dataset":
        q = np.atleast_2d(np.asarray(quantities, dtype=np.float64))
        p = np.atleast_2d(np.asarray(prices, dtype=np.float64))
        if q.shape != p.shape:
            raise InputError(f"quantities {q.shape} and prices {p.shape} differ in shape")
        if labels is not None and len(labels) != q.shape[0]:
            raise InputError("one label per observation is required")
        return cls(
            [
                Observation(i, Bundle(q[i]), PriceVector(p[i]), None if labels is None else labels[i])
                for i in range(q.shape[0])
            ]
        )

    @property
    def n(self) -> int:
        return len(self.observations)

    @property
    def labels(self) -> list[str]:
        return [o.name for o in self.observations]

    def __len__(self) -> int:
        return len(self.observations)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Dataset)
            and np.array_equal(self.quantities, other.quantities)
            and np.array_equal(self.prices, other.prices)
            and self.labels == other.labels
        )

    def __repr__(self) -> str:
        return f"Dataset(n={self.n}, m={self.dimension})"

    def reordered(self, order: Sequence[int]) -> "Dataset":
        """Copy with observations permuted; ``order[k]`` is the old index placed at ``k``."""
        order = list(order)
        return Dataset.from_arrays(
            self.quantities[order],
            self.prices[order],
            [self.observations[i].name for i in order],
        )


def _standard_inner(x: NDArray[np.float64], y: NDArray[np.float64]) -> float:
    return float(np.dot(x, y))


@dataclass(frozen=True)
class Kernel:
    """A positive function ``b(x, y)`` homogeneous of degree one in each argument.

    ``matrix`` optionally evaluates ``b`` for all pairs of rows at once; it is
    used by the matrix builders when present.
    """

    evaluator: Callable[[NDArray[np.float64], NDArray[np.float64]], float]
    tag: str = "inner"
    matrix: Callable[[NDArray[np.float64], NDArray[np.float64]], NDArray[np.float64]] | None = field(
        default=None, compare=False, repr=False
    )

    def __call__(self, x: ArrayLike, y: ArrayLike) -> float:
        return float(self.evaluator(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)))

    @property
    def is_standard(self) -> bool:
        return self.tag == "inner"

    def pairwise(self, xs: NDArray[np.float64], ys: NDArray[np.float64]) -> NDArray[np.float64]:
        """``out[i, j] = b(xs[i], ys[j])``."""
        xs = np.atleast_2d(xs)
        ys = np.atleast_2d(ys)
        if self.matrix is not None:
            return np.asarray(self.matrix(xs, ys), dtype=np.float64)
        out = np.empty((xs.shape[0], ys.shape[0]))
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                out[i, j] = self.evaluator(x, y)
        return out


INNER = Kernel(_standard_inner, "inner", lambda xs, ys: xs @ ys.T)


def weighted_inner_kernel(weights: ArrayLike) -> Kernel:
    """``b(x, y) = sum_k w_k x_k y_k`` with positive weights."""
    w = as_positive_vector(weights, "kernel weights")
    return Kernel(
        lambda x, y: float(np.dot(w * x, y)),
        f"weighted-inner{w.tolist()}",
        lambda xs, ys: (xs * w) @ ys.T,
    )


def power_kernel(r: float) -> Kernel:
    """``b(x, y) = (sum_k (x_k y_k)^r)^(1/r)``; ``r = 1`` is the inner product."""
    if not r > 0:
        raise InputError(f"power kernel exponent must be positive, got {r}")

    def _b(x, y):
        return float(np.sum((x * y) ** r) ** (1.0 / r))

    def _mat(xs, ys):
        return np.sum((xs[:, None, :] * ys[None, :, :]) ** r, axis=2) ** (1.0 / r)

    return Kernel(_b, f"power[{r!r}]", _mat)


def _vector(v, what: str) -> NDArray[np.float64]:
    if isinstance(v, Bundle):
        return v.q
    if isinstance(v, PriceVector):
        return v.p
    return as_positive_vector(v, what)


def inner(x: Bundle | ArrayLike, p: PriceVector | ArrayLike) -> float:
    """Expenditure ``<x, p>`` of bundle ``x`` at prices ``p``."""
    xv, pv = _vector(x, "bundle"), _vector(p, "price vector")
    if xv.size != pv.size:
        raise InputError(f"dimension mismatch: bundle {xv.size} vs prices {pv.size}")
    return float(np.dot(xv, pv))


def log_cost(x: Bundle | ArrayLike, p: PriceVector | ArrayLike, kernel: Kernel = INNER) -> float:
    """``ln b(x, p)``."""
    xv, pv = _vector(x, "bundle"), _vector(p, "price vector")
    if xv.size != pv.size:
        raise InputError(f"dimension mismatch: bundle {xv.size} vs prices {pv.size}")
    value = kernel.evaluator(xv, pv)
    if not value > 0:
        raise InputError(f"kernel {kernel.tag} returned a nonpositive value {value!r}")
    return float(np.log(value))
