"""Discrete Monge-Kantorovich problems with cost ``c(x, y) = ln b(x, y)``.

A dataset ``{(X^i, P^i)}`` becomes the uniform instance with sources ``X^i``
and targets ``P^i``; the data are homogeneously rationalizable exactly when
the diagonal coupling ``X^i -> P^i`` is optimal for it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import linprog

from . import kernels
from .core import INNER, Dataset, InputError, Kernel, as_positive_vector
from .rationality import DEFAULT_TOLERANCE, ORACLE_CAP, CapExceeded, check_cyclical_monotonicity

__all__ = [
    "ASSIGNMENT_CAP",
    "VALUE_TOLERANCE",
    "SUPPORT_THRESHOLD",
    "TransportInstance",
    "Coupling",
    "DualPotentials",
    "DiagonalReport",
    "brute_force_assignment",
    "solve_assignment",
    "solve_discrete_ot",
    "permutation_values",
    "optimal_permutations",
    "diagonal_report",
    "is_diagonal_optimal",
    "diagonal_coupling",
    "check_support_cyclical_monotonicity",
    "project_to_sphere",
    "cost_decomposition_check",
    "projection_preserves_optimum",
]

ASSIGNMENT_CAP = 10
VALUE_TOLERANCE = 1e-10
SUPPORT_THRESHOLD = 1e-12
_WEIGHT_TOL = 1e-12


def _points(rows: ArrayLike, what: str) -> NDArray[np.float64]:
    arr = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    out = np.vstack([as_positive_vector(r, what) for r in arr])
    out.setflags(write=False)
    return out


def _weights(w: ArrayLike | None, k: int, what: str) -> NDArray[np.float64]:
    if w is None:
        out = np.full(k, 1.0 / k)
    else:
        out = np.array(w, dtype=np.float64).reshape(-1)
        if out.size != k:
            raise InputError(f"{what}: expected {k} weights, got {out.size}")
        if not np.all(np.isfinite(out)) or np.any(out < 0):
            raise InputError(f"{what} must be finite and nonnegative")
        if abs(out.sum() - 1.0) > _WEIGHT_TOL:
            raise InputError(f"{what} sum to {out.sum()!r}, not 1 (unbalanced instance)")
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class TransportInstance:
    """Sources with weights ``mu`` and targets with weights ``nu`` (each summing to 1)."""

    sources: NDArray[np.float64]
    targets: NDArray[np.float64]
    source_weights: NDArray[np.float64]
    target_weights: NDArray[np.float64]
    kernel: Kernel
    cost: NDArray[np.float64]

    def __init__(
        self,
        sources: ArrayLike,
        targets: ArrayLike,
        source_weights: ArrayLike | None = None,
        target_weights: ArrayLike | None = None,
        kernel: Kernel = INNER,
    ):
        xs = _points(sources, "source")
        ys = _points(targets, "target")
        if xs.shape[1] != ys.shape[1]:
            raise InputError(f"sources have dimension {xs.shape[1]}, targets {ys.shape[1]}")
        b = kernel.pairwise(xs, ys)
        if not np.all(b > 0) or not np.all(np.isfinite(b)):
            raise InputError("kernel values must be positive and finite")
        cost = np.log(b)
        cost.setflags(write=False)
        object.__setattr__(self, "sources", xs)
        object.__setattr__(self, "targets", ys)
        object.__setattr__(self, "source_weights", _weights(source_weights, xs.shape[0], "source weights"))
        object.__setattr__(self, "target_weights", _weights(target_weights, ys.shape[0], "target weights"))
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "cost", cost)

    @classmethod
    def from_dataset(cls, data: Dataset, kernel: Kernel = INNER) -> "TransportInstance":
        return cls(data.quantities, data.prices, kernel=kernel)

    @property
    def shape(self) -> tuple[int, int]:
        return self.cost.shape

    def is_uniform_square(self) -> bool:
        k, l = self.shape
        return k == l and np.all(self.source_weights == 1.0 / k) and np.all(self.target_weights == 1.0 / l)


@dataclass(frozen=True, eq=False)
class Coupling:
    plan: NDArray[np.float64]
    value: float

    @classmethod
    def from_plan(cls, plan: ArrayLike, inst: TransportInstance) -> "Coupling":
        pi = np.array(plan, dtype=np.float64)
        if pi.shape != inst.shape:
            raise InputError(f"plan shape {pi.shape} does not match instance {inst.shape}")
        if np.any(pi < 0):
            raise InputError("a transport plan must be nonnegative")
        pi.setflags(write=False)
        return cls(pi, float(np.sum(pi * inst.cost)))

    def marginal_error(self, inst: TransportInstance) -> float:
        return float(
            max(
                np.abs(self.plan.sum(axis=1) - inst.source_weights).max(),
                np.abs(self.plan.sum(axis=0) - inst.target_weights).max(),
            )
        )

    def is_feasible(self, inst: TransportInstance, tol: float = VALUE_TOLERANCE) -> bool:
        return bool(np.all(self.plan >= 0) and self.marginal_error(inst) <= tol)


@dataclass(frozen=True, eq=False)
class DualPotentials:
    """Source potentials ``phi`` and target potentials ``psi``."""

    phi: NDArray[np.float64]
    psi: NDArray[np.float64]

    def feasibility_gap(self, inst: TransportInstance) -> float:
        """``max_ij (phi_i + psi_j - C_ij)``; nonpositive when dual feasible."""
        return float(np.max(self.phi[:, None] + self.psi[None, :] - inst.cost))

    def slackness_gap(self, plan: Coupling, inst: TransportInstance, threshold: float = SUPPORT_THRESHOLD) -> float:
        """Largest ``|phi_i + psi_j - C_ij|`` over the support of ``plan``."""
        support = plan.plan > threshold
        if not support.any():
            return 0.0
        gap = np.abs(self.phi[:, None] + self.psi[None, :] - inst.cost)
        return float(gap[support].max())

    def dual_value(self, inst: TransportInstance) -> float:
        return float(self.phi @ inst.source_weights + self.psi @ inst.target_weights)


def _check_square(c: ArrayLike) -> NDArray[np.float64]:
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] == 0:
        raise InputError(f"assignment needs a nonempty square matrix, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise InputError("assignment cost matrix must be finite")
    return c


def _perm_value(c: NDArray[np.float64], perm) -> float:
    total = 0.0
    for i, j in enumerate(perm):
        total += c[i, j]
    return float(total)


def brute_force_assignment(cost: ArrayLike, cap: int = ASSIGNMENT_CAP) -> tuple[tuple[int, ...], float]:
    """Exhaustive minimum over all permutations; ties go to the lexicographically first."""
    c = _check_square(cost)
    if c.shape[0] > cap:
        raise CapExceeded(f"exhaustive assignment refuses n={c.shape[0]} > cap={cap}")
    perm, value = kernels.brute_force_assignment(c)
    return tuple(int(j) for j in perm), float(value)


def solve_assignment(cost: ArrayLike) -> tuple[tuple[int, ...], float]:
    """Optimal assignment by the Hungarian method (``O(n^3)``)."""
    c = _check_square(cost)
    perm, _, _ = kernels.hungarian(c)
    perm = tuple(int(j) for j in perm)
    return perm, _perm_value(c, perm)


def _assignment_potentials(c: NDArray[np.float64]):
    perm, u, v = kernels.hungarian(c)
    return perm, u, v


def solve_discrete_ot(inst: TransportInstance) -> tuple[Coupling, DualPotentials]:
    """Optimal coupling and Kantorovich potentials.

    Uniform square instances are solved as assignment problems (the Hungarian
    potentials are the dual); other instances go to the HiGHS simplex.
    Zero-weight points are removed before solving and receive c-transform
    potentials afterwards.
    """
    k, l = inst.shape
    c = inst.cost
    if inst.is_uniform_square():
        perm, u, v = _assignment_potentials(c)
        plan = np.zeros((k, l))
        plan[np.arange(k), perm] = 1.0 / k
        return Coupling.from_plan(plan, inst), DualPotentials(np.asarray(u), np.asarray(v))

    rows = np.flatnonzero(inst.source_weights > 0)
    cols = np.flatnonzero(inst.target_weights > 0)
    sub = c[np.ix_(rows, cols)]
    mu, nu = inst.source_weights[rows], inst.target_weights[cols]
    kr, lc = sub.shape
    a_eq = np.zeros((kr + lc, kr * lc))
    for i in range(kr):
        a_eq[i, i * lc : (i + 1) * lc] = 1.0
    for j in range(lc):
        a_eq[kr + j, j::lc] = 1.0
    res = linprog(sub.ravel(), A_eq=a_eq, b_eq=np.concatenate([mu, nu]), bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    plan = np.zeros((k, l))
    plan[np.ix_(rows, cols)] = np.maximum(res.x.reshape(kr, lc), 0.0)
    marg = np.asarray(res.eqlin.marginals)
    phi = np.full(k, np.nan)
    psi = np.full(l, np.nan)
    phi[rows] = marg[:kr]
    psi[cols] = marg[kr:]
    # zero-weight points: c-transforms keep dual feasibility
    for i in np.setdiff1d(np.arange(k), rows):
        phi[i] = np.min(c[i, cols] - psi[cols])
    for j in np.setdiff1d(np.arange(l), cols):
        psi[j] = np.min(c[:, j] - phi)
    return Coupling.from_plan(plan, inst), DualPotentials(phi, psi)


def permutation_values(cost: ArrayLike, cap: int = ORACLE_CAP) -> tuple[NDArray[np.int64], NDArray[np.float64]]:
    """Every permutation (lexicographic order) and its total cost."""
    c = _check_square(cost)
    n = c.shape[0]
    if n > cap:
        raise CapExceeded(f"permutation enumeration refuses n={n} > cap={cap}")
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    total = c[0, perms[:, 0]].copy()
    for i in range(1, n):
        total += c[i, perms[:, i]]
    return perms, total


def optimal_permutations(cost: ArrayLike, tol: float = VALUE_TOLERANCE, cap: int = ORACLE_CAP) -> frozenset:
    """All permutations whose total is within ``tol`` of the minimum."""
    perms, total = permutation_values(cost, cap)
    keep = total <= total.min() + tol
    return frozenset(tuple(int(j) for j in p) for p in perms[keep])


@dataclass(frozen=True)
class DiagonalReport:
    identity_value: float
    optimal_value: float
    optimal_permutation: tuple[int, ...]
    diagonal_optimal: bool
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "identity_value": self.identity_value,
            "optimal_value": self.optimal_value,
            "optimal_permutation": list(self.optimal_permutation),
            "diagonal_optimal": self.diagonal_optimal,
            "tolerance": self.tolerance,
        }


def diagonal_report(data: Dataset, kernel: Kernel = INNER, tolerance: float = DEFAULT_TOLERANCE) -> DiagonalReport:
    """Compare the identity pairing ``X^i -> P^i`` with the optimal assignment (totals, not averages)."""
    c = TransportInstance.from_dataset(data, kernel).cost
    perm, opt = solve_assignment(c)
    ident = _perm_value(c, range(data.n))
    return DiagonalReport(ident, opt, perm, bool(ident <= opt + tolerance), tolerance)


def is_diagonal_optimal(data: Dataset, kernel: Kernel = INNER, tolerance: float = DEFAULT_TOLERANCE) -> bool:
    return diagonal_report(data, kernel, tolerance).diagonal_optimal


def diagonal_coupling(inst: TransportInstance) -> Coupling:
    k, l = inst.shape
    if k != l:
        raise InputError("the diagonal coupling needs as many sources as targets")
    return Coupling.from_plan(np.diag(inst.source_weights), inst)


def check_support_cyclical_monotonicity(
    plan: Coupling,
    inst: TransportInstance,
    tolerance: float = DEFAULT_TOLERANCE,
    threshold: float = SUPPORT_THRESHOLD,
    cap: int = ORACLE_CAP,
) -> bool:
    """Is the support ``{(x_i, y_j) : pi_ij > threshold}`` c-cyclically monotone?"""
    idx = np.argwhere(plan.plan > threshold)
    if len(idx) > cap:
        raise CapExceeded(f"support of size {len(idx)} exceeds the enumeration cap {cap}")
    pts = [(inst.sources[i], inst.targets[j]) for i, j in idx]
    kernel = inst.kernel
    verdict = check_cyclical_monotonicity(pts, lambda x, y: math.log(kernel.evaluator(x, y)), tolerance, cap)
    return verdict.rationalizable


def _unit_rows(a: NDArray[np.float64]) -> NDArray[np.float64]:
    return a / np.linalg.norm(a, axis=1, keepdims=True)


def project_to_sphere(obj):
    """Radially project every bundle and price vector onto the unit sphere.

    Accepts a :class:`Dataset`, a :class:`TransportInstance` (weights kept),
    or a 1-D/2-D array of positive vectors.
    """
    if isinstance(obj, Dataset):
        return Dataset.from_arrays(_unit_rows(obj.quantities), _unit_rows(obj.prices), obj.labels)
    if isinstance(obj, TransportInstance):
        return TransportInstance(
            _unit_rows(obj.sources),
            _unit_rows(obj.targets),
            obj.source_weights,
            obj.target_weights,
            obj.kernel,
        )
    arr = np.asarray(obj, dtype=np.float64)
    if arr.ndim == 1:
        return as_positive_vector(arr) / np.linalg.norm(arr)
    return _unit_rows(_points(arr, "vector"))


def cost_decomposition_check(plan: Coupling, inst: TransportInstance) -> float:
    """``|sum pi ln b(x/|x|, y/|y|) - (sum pi ln b(x, y) - sum mu ln|x| - sum nu ln|y|)|``."""
    proj = project_to_sphere(inst)
    lhs = float(np.sum(plan.plan * proj.cost))
    rhs = (
        float(np.sum(plan.plan * inst.cost))
        - float(inst.source_weights @ np.log(np.linalg.norm(inst.sources, axis=1)))
        - float(inst.target_weights @ np.log(np.linalg.norm(inst.targets, axis=1)))
    )
    return abs(lhs - rhs)


def projection_preserves_optimum(
    data: Dataset, kernel: Kernel = INNER, tol: float = VALUE_TOLERANCE, cap: int = ORACLE_CAP
) -> bool:
    """Do the original and sphere-projected costs have the same optimal permutations?"""
    if data.n > cap:
        raise CapExceeded(f"projection oracle refuses n={data.n} > cap={cap}")
    c = TransportInstance.from_dataset(data, kernel).cost
    c_proj = TransportInstance.from_dataset(project_to_sphere(data), kernel).cost
    return optimal_permutations(c, tol, cap) == optimal_permutations(c_proj, tol, cap)
