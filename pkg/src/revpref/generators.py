"""Seeded synthetic datasets.

Cobb-Douglas and CES demand produce homogeneously rationalizable data;
``inject_violation`` manufactures HARP failures from them.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import Dataset, InputError, as_positive_vector
from .rationality import cross_log_matrix

__all__ = [
    "log_uniform",
    "cobb_douglas_demand",
    "ces_demand",
    "gen_cobb_douglas",
    "gen_ces",
    "gen_random",
    "inject_violation",
]

Sampler = Callable[[np.random.Generator, tuple], NDArray[np.float64]]


def log_uniform(low: float, high: float) -> Sampler:
    lo, hi = np.log(low), np.log(high)
    return lambda rng, size: np.exp(rng.uniform(lo, hi, size=size))


DEFAULT_PRICES = log_uniform(0.1, 10.0)
DEFAULT_INCOME = log_uniform(1.0, 10.0)


def _alpha(alpha: ArrayLike | None, m: int) -> NDArray[np.float64]:
    if alpha is None:
        return np.full(m, 1.0 / m)
    a = as_positive_vector(alpha, "exponents")
    if a.size != m:
        raise InputError(f"expected {m} exponents, got {a.size}")
    if abs(a.sum() - 1.0) > 1e-12:
        raise InputError(f"exponents must sum to 1, got {a.sum()!r}")
    return a


def cobb_douglas_demand(alpha: ArrayLike, prices: ArrayLike, income: float) -> NDArray[np.float64]:
    """``x_k = alpha_k w / p_k``."""
    a = np.asarray(alpha, dtype=np.float64)
    return a * income / np.asarray(prices, dtype=np.float64)


def ces_demand(rho: float, weights: ArrayLike, prices: ArrayLike, income: float) -> NDArray[np.float64]:
    """Demand for ``u = (sum a_k x_k^rho)^(1/rho)``: ``x_k`` proportional to ``(a_k/p_k)^sigma``, ``sigma = 1/(1-rho)``."""
    a = np.asarray(weights, dtype=np.float64)
    p = np.asarray(prices, dtype=np.float64)
    sigma = 1.0 / (1.0 - rho)
    share = (a / p) ** sigma
    return income * share / np.dot(p, share)


def _samples(rng, n, m, price_sampler, income_sampler):
    p = np.asarray((price_sampler or DEFAULT_PRICES)(rng, (n, m)), dtype=np.float64)
    w = np.asarray((income_sampler or DEFAULT_INCOME)(rng, (n,)), dtype=np.float64)
    return p, w


def gen_cobb_douglas(
    n: int,
    m: int,
    alpha: ArrayLike | None = None,
    price_sampler: Sampler | None = None,
    income_sampler: Sampler | None = None,
    seed: int = 0,
) -> Dataset:
    """Cobb-Douglas demand at sampled prices and incomes (default ``alpha_k = 1/m``)."""
    if n < 1 or m < 1:
        raise InputError("n and m must be positive")
    a = _alpha(alpha, m)
    rng = np.random.default_rng(seed)
    p, w = _samples(rng, n, m, price_sampler, income_sampler)
    q = a[None, :] * w[:, None] / p
    return Dataset.from_arrays(q, p)


def gen_ces(
    n: int,
    m: int,
    rho: float,
    weights: ArrayLike | None = None,
    price_sampler: Sampler | None = None,
    income_sampler: Sampler | None = None,
    seed: int = 0,
) -> Dataset:
    """CES demand at sampled prices and incomes; needs ``rho < 1``, ``rho != 0``."""
    if n < 1 or m < 1:
        raise InputError("n and m must be positive")
    if not rho < 1 or rho == 0:
        raise InputError(f"CES needs rho < 1 and rho != 0, got {rho}")
    a = np.full(m, 1.0 / m) if weights is None else as_positive_vector(weights, "CES weights")
    if a.size != m:
        raise InputError(f"expected {m} CES weights, got {a.size}")
    rng = np.random.default_rng(seed)
    p, w = _samples(rng, n, m, price_sampler, income_sampler)
    q = np.vstack([ces_demand(rho, a, p[i], w[i]) for i in range(n)])
    return Dataset.from_arrays(q, p)


def gen_random(n: int, m: int, seed: int = 0, low: float = 0.1, high: float = 10.0) -> Dataset:
    """Independent log-uniform bundles and prices; usually not rationalizable for larger ``n``."""
    rng = np.random.default_rng(seed)
    s = log_uniform(low, high)
    return Dataset.from_arrays(s(rng, (n, m)), s(rng, (n, m)))


def inject_violation(data: Dataset, strength: float = 1.0, seed: int = 0) -> Dataset:
    """Move bundle ``i`` toward another observation's bundle ``j`` and vice versa.

    ``i`` is drawn from ``seed``; ``j`` is the partner whose two-cycle
    ``a_ij + a_ji`` is most positive.  The bundles are interpolated
    geometrically, ``X^i <- X^i^(1-s) X^j^s``; at ``s = 1`` they are swapped,
    which negates that two-cycle and so breaks HARP whenever it held strictly.
    """
    if data.n < 2:
        raise InputError("injecting a violation needs at least two observations")
    if not 0.0 <= strength <= 1.0:
        raise InputError(f"strength must lie in [0, 1], got {strength}")
    q = np.array(data.quantities)
    if strength == 0.0:
        return Dataset.from_arrays(q, data.prices, data.labels)
    rng = np.random.default_rng(seed)
    i = int(rng.integers(data.n))
    a = cross_log_matrix(data).a
    margin = a[i, :] + a[:, i]
    margin[i] = -np.inf
    j = int(np.argmax(margin))
    qi, qj = q[i].copy(), q[j].copy()
    q[i] = qi ** (1.0 - strength) * qj**strength
    q[j] = qj ** (1.0 - strength) * qi**strength
    return Dataset.from_arrays(q, data.prices, data.labels)
