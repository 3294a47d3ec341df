"""Construction and verification of rationalizing utilities.

Two forms are built:

* the homogeneous utility ``u(z) = min_i exp(v_i - d_i) b(z, P^i)`` whose log
  potentials ``v`` are shortest-path distances in the revealed-preference
  graph and ``d_i = ln b(X^i, P^i)``;
* the concave Afriat utility ``u(x) = min_i {y_i + s_i <P^i, x - X^i>}`` from a
  feasible solution of the Afriat inequalities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import kernels
from .core import INNER, Bundle, Dataset, InputError, Kernel, as_positive_vector
from .rationality import (
    DEFAULT_TOLERANCE,
    CrossLogMatrix,
    Verdict,
    check_garp,
    cross_log_matrix,
    harp_from_matrix,
)
from .simplex import LPError, two_phase_simplex

__all__ = [
    "NotRationalizable",
    "AfriatInfeasible",
    "LPError",
    "HomogeneousUtility",
    "AfriatSolution",
    "AfriatUtility",
    "RationalizationReport",
    "shortest_path_potentials",
    "build_homogeneous_utility",
    "evaluate_utility",
    "sample_bundles",
    "verify_rationalization",
    "afriat_solve",
    "afriat_from_homogeneous",
    "superdifferential_gap",
    "check_superdifferential",
]

DEFAULT_SAMPLES = 1000
DEFAULT_SEED = 0
SAMPLE_RANGE = (1e-2, 1e2)


class NotRationalizable(ValueError):
    """The data violate the axiom required by the requested construction."""

    def __init__(self, verdict: Verdict, message: str | None = None):
        self.verdict = verdict
        super().__init__(
            message
            or f"data are not rationalizable: cycle {list(verdict.witness or ())} has sum {verdict.cycle_sum}"
        )


class AfriatInfeasible(NotRationalizable):
    """The Afriat inequalities have no solution; carries the LP and GARP evidence."""

    def __init__(self, verdict: Verdict, phase1_objective: float):
        self.phase1_objective = phase1_objective
        super().__init__(
            verdict,
            f"Afriat system infeasible (phase-1 residual {phase1_objective:.6g}); "
            f"GARP violated on cycle {list(verdict.witness or ())}",
        )


@dataclass(frozen=True, eq=False)
class HomogeneousUtility:
    """Degree-one homogeneous utility built from log potentials."""

    data: Dataset
    potentials: NDArray[np.float64]
    kernel: Kernel = INNER
    normalizers: NDArray[np.float64] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        v = np.array(self.potentials, dtype=np.float64)
        if v.shape != (self.data.n,):
            raise InputError(f"expected {self.data.n} potentials, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "potentials", v)
        d = np.log(np.diagonal(self.kernel.pairwise(self.data.quantities, self.data.prices)))
        d.setflags(write=False)
        object.__setattr__(self, "normalizers", d)

    def log_values(self, zs: ArrayLike) -> NDArray[np.float64]:
        """``ln u`` at every row of ``zs``."""
        zs = np.atleast_2d(np.asarray(zs, dtype=np.float64))
        logs = np.log(self.kernel.pairwise(zs, self.data.prices))
        return np.min(logs + (self.potentials - self.normalizers)[None, :], axis=1)

    def values(self, zs: ArrayLike) -> NDArray[np.float64]:
        return np.exp(self.log_values(zs))

    def minimizers(self, zs: ArrayLike) -> NDArray[np.int64]:
        zs = np.atleast_2d(np.asarray(zs, dtype=np.float64))
        logs = np.log(self.kernel.pairwise(zs, self.data.prices))
        return np.argmin(logs + (self.potentials - self.normalizers)[None, :], axis=1)

    def potential_gap(self) -> float:
        """``max_ij (v_j - v_i - a_ij)``; nonpositive for a valid model."""
        a = cross_log_matrix(self.data, self.kernel).a
        v = self.potentials
        return float(np.max(v[None, :] - v[:, None] - a))


@dataclass(frozen=True, eq=False)
class AfriatSolution:
    levels: NDArray[np.float64]
    multipliers: NDArray[np.float64]
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        y = np.array(self.levels, dtype=np.float64)
        s = np.array(self.multipliers, dtype=np.float64)
        if y.shape != s.shape or y.ndim != 1:
            raise InputError("levels and multipliers must be vectors of equal length")
        if not np.all(s > 0):
            raise InputError("Afriat multipliers must be strictly positive")
        y.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "levels", y)
        object.__setattr__(self, "multipliers", s)

    def residual(self, data: Dataset) -> float:
        """``max_ij (y_j - y_i - s_i <P^i, X^j - X^i>)``; feasible iff <= tolerance."""
        g = _afriat_gaps(data)
        y, s = self.levels, self.multipliers
        return float(np.max(y[None, :] - y[:, None] - s[:, None] * g))


@dataclass(frozen=True, eq=False)
class AfriatUtility:
    solution: AfriatSolution
    data: Dataset

    def __post_init__(self):
        if self.solution.levels.size != self.data.n:
            raise InputError("Afriat solution and dataset sizes differ")

    def values(self, xs: ArrayLike) -> NDArray[np.float64]:
        xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        y, s = self.solution.levels, self.solution.multipliers
        p, q = self.data.prices, self.data.quantities
        own = np.einsum("ij,ij->i", p, q)
        return np.min(y[None, :] + s[None, :] * (xs @ p.T - own[None, :]), axis=1)


Model = Union[HomogeneousUtility, AfriatUtility]


def _afriat_gaps(data: Dataset) -> NDArray[np.float64]:
    # g[i, j] = <P^i, X^j - X^i>
    e = data.prices @ data.quantities.T
    return e - np.diagonal(e)[:, None]


def shortest_path_potentials(a: CrossLogMatrix, tolerance: float = DEFAULT_TOLERANCE) -> NDArray[np.float64]:
    """Shortest-path distances from observation 0 in the revealed-preference graph.

    Raises :class:`NotRationalizable` when a negative cycle exists.
    """
    verdict = harp_from_matrix(a, tolerance)
    if not verdict.rationalizable:
        raise NotRationalizable(verdict)
    dist, _, _ = kernels.floyd_warshall(a.a, tolerance)
    return dist[0].copy()


def build_homogeneous_utility(
    data: Dataset, kernel: Kernel = INNER, tolerance: float = DEFAULT_TOLERANCE
) -> HomogeneousUtility:
    """Homogeneous rationalizing utility with ``u(X^i) = exp(v_i)``.

    >>> from revpref.core import Dataset
    >>> d = Dataset.from_arrays([[1, 1], [0.5, 1]], [[1, 1], [2, 1]])
    >>> model = build_homogeneous_utility(d)
    >>> [round(float(u), 12) for u in model.values(d.quantities)]
    [1.0, 0.75]
    """
    v = shortest_path_potentials(cross_log_matrix(data, kernel), tolerance)
    return HomogeneousUtility(data, v, kernel)


def evaluate_utility(model: Model, z: Bundle | ArrayLike) -> float:
    zv = z.q if isinstance(z, Bundle) else as_positive_vector(z, "bundle")
    if zv.size != model.data.dimension:
        raise InputError(f"dimension mismatch: bundle {zv.size} vs model {model.data.dimension}")
    return float(model.values(zv[None, :])[0])


def sample_bundles(m: int, count: int, seed: int = DEFAULT_SEED) -> NDArray[np.float64]:
    """Log-uniform positive bundles on ``[1e-2, 1e2]^m``; deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    lo, hi = np.log(SAMPLE_RANGE[0]), np.log(SAMPLE_RANGE[1])
    return np.exp(rng.uniform(lo, hi, size=(count, m)))


@dataclass(frozen=True)
class RationalizationReport:
    passed: bool
    max_violation: float
    data_point_violation: float
    sample_violation: float
    worst_observation: int
    samples: int
    seed: int
    tolerance: float
    model_kind: str
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_violation": self.max_violation,
            "data_point_violation": self.data_point_violation,
            "sample_violation": self.sample_violation,
            "worst_observation": self.worst_observation,
            "samples": self.samples,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "model_kind": self.model_kind,
            "notes": list(self.notes),
        }


def _homogeneous_violations(model: HomogeneousUtility, data: Dataset, zs: NDArray[np.float64]):
    # relative excess of u(Z)/b(Z, P^i) over u(X^i)/b(X^i, P^i), per (Z, i)
    log_u_z = model.log_values(zs)
    log_b = np.log(model.kernel.pairwise(zs, data.prices))
    log_u_x = model.log_values(data.quantities)
    own = np.log(np.diagonal(model.kernel.pairwise(data.quantities, data.prices)))
    log_ratio = (log_u_z[:, None] - log_b) - (log_u_x - own)[None, :]
    return np.expm1(log_ratio)


def _afriat_violations(model: AfriatUtility, data: Dataset, zs: NDArray[np.float64]):
    # scale each Z onto budget i, then compare u(Z') with u(X^i)
    e = zs @ data.prices.T
    own = np.einsum("ij,ij->i", data.prices, data.quantities)
    u_x = model.values(data.quantities)
    out = np.empty((zs.shape[0], data.n))
    for i in range(data.n):
        zi = zs * (own[i] / e[:, i])[:, None]
        out[:, i] = (model.values(zi) - u_x[i]) / max(1.0, abs(u_x[i]))
    return out


def verify_rationalization(
    model: Model,
    data: Dataset,
    samples: int = DEFAULT_SAMPLES,
    tolerance: float = DEFAULT_TOLERANCE,
    seed: int = DEFAULT_SEED,
) -> RationalizationReport:
    """Check that each ``X^i`` is optimal on its budget under ``model``.

    Homogeneous models are checked through
    ``u(X^i)/b(X^i, P^i) >= u(Z)/b(Z, P^i)``; Afriat models by rescaling each
    ``Z`` onto budget ``i`` and requiring ``u(Z') <= u(X^i)``.  Every data
    bundle is checked against every budget, plus ``samples`` random bundles
    per observation.  Violations are relative and reported, not raised.
    """
    if model.data.dimension != data.dimension or model.data.n != data.n:
        raise InputError("model was built on a different dataset shape")
    if isinstance(model, HomogeneousUtility):
        fn, kind = _homogeneous_violations, "homogeneous"
    else:
        fn, kind = _afriat_violations, "afriat"
    at_data = fn(model, data, data.quantities)
    data_max = float(at_data.max())
    total = samples * data.n
    if total:
        at_samples = fn(model, data, sample_bundles(data.dimension, total, seed))
        sample_max = float(at_samples.max())
        worst_sample = int(np.unravel_index(np.argmax(at_samples), at_samples.shape)[1])
    else:
        sample_max, worst_sample = -np.inf, 0
    worst = int(np.unravel_index(np.argmax(at_data), at_data.shape)[1]) if data_max >= sample_max else worst_sample
    max_v = max(data_max, sample_max)
    return RationalizationReport(
        passed=bool(max_v <= tolerance),
        max_violation=max_v,
        data_point_violation=data_max,
        sample_violation=sample_max,
        worst_observation=worst,
        samples=samples,
        seed=seed,
        tolerance=tolerance,
        model_kind=kind,
    )


def _afriat_constraints(data: Dataset):
    n = data.n
    g = _afriat_gaps(data)
    rows, rhs = [], []
    # variables: y+ (n), y- (n), t (n) with s = 1 + t
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            r = np.zeros(3 * n)
            r[j] += 1.0
            r[i] -= 1.0
            r[n + j] -= 1.0
            r[n + i] += 1.0
            r[2 * n + i] = -g[i, j]
            rows.append(r)
            rhs.append(g[i, j])
    return np.array(rows).reshape(-1, 3 * n), np.array(rhs)


def afriat_solve(data: Dataset, tolerance: float = DEFAULT_TOLERANCE) -> AfriatSolution:
    """Solve ``y_j - y_i <= s_i <P^i, X^j - X^i>`` with ``s_i >= 1``.

    Phase 1 of the simplex decides feasibility; phase 2 returns the vertex
    minimising ``sum s_i``.  Infeasible systems raise :class:`AfriatInfeasible`
    carrying a GARP witness.  A solution is always re-verified against the
    original inequalities before it is returned.
    """
    n = data.n
    if n == 1:
        return AfriatSolution(np.zeros(1), np.ones(1))
    A, b = _afriat_constraints(data)
    c = np.concatenate([np.zeros(2 * n), np.ones(n)])
    res = two_phase_simplex(c, A, b, tol=tolerance)
    garp = check_garp(data, tolerance)
    if res.status == "infeasible":
        if garp.rationalizable:
            raise LPError(
                f"simplex reports infeasibility (phase-1 residual {res.phase1_objective:.3g}) "
                "but GARP holds; refusing to answer"
            )
        raise AfriatInfeasible(garp, res.phase1_objective)
    if res.status != "optimal":
        raise LPError(f"unexpected simplex status {res.status!r}")
    x = res.x
    y = x[:n] - x[n : 2 * n]
    y = y - y.min()
    s = 1.0 + x[2 * n :]
    notes = ["(y, s) is one vertex of a feasible cone; other solutions exist"]
    if not garp.rationalizable:
        notes.append("feasible within tolerance although GARP flags a boundary cycle")
    sol = AfriatSolution(y, s, tuple(notes))
    g = _afriat_gaps(data)
    scale = max(1.0, float(np.max(np.abs(s[:, None] * g))), float(np.max(np.abs(y))))
    resid = sol.residual(data)
    if resid > tolerance * scale:
        raise LPError(f"simplex solution fails verification (residual {resid:.3g})")
    return sol


def afriat_from_homogeneous(model: HomogeneousUtility, normalize: bool = True) -> AfriatSolution:
    """Afriat certificate ``y_i = exp(v_i)``, ``s_i = exp(v_i) / <P^i, X^i>``.

    With ``normalize`` the pair is divided by ``min_i s_i`` so that every
    multiplier is at least one.
    """
    if not model.kernel.is_standard:
        raise InputError("the Afriat certificate needs the standard inner-product kernel")
    own = np.einsum("ij,ij->i", model.data.prices, model.data.quantities)
    y = np.exp(model.potentials)
    s = y / own
    if normalize:
        k = s.min()
        y, s = y / k, s / k
    return AfriatSolution(y, s)


def superdifferential_gap(
    model: Model,
    data: Dataset,
    cost: Callable[[NDArray[np.float64], NDArray[np.float64]], float] | None = None,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> float:
    """Largest ``f(z) - f(X^i) - c(z, P^i) + c(X^i, P^i)`` over data and sampled ``z``.

    For a homogeneous model ``f = log u`` and ``c = ln b`` unless ``cost`` is
    given; for an Afriat model ``f = u`` and ``c(z, P^i) = s_i <P^i, z>``.
    """
    zs = data.quantities
    if samples:
        zs = np.vstack([zs, sample_bundles(data.dimension, samples * data.n, seed)])
    if isinstance(model, HomogeneousUtility):
        f_z = model.log_values(zs)
        f_x = model.log_values(data.quantities)
        if cost is None:
            c_z = np.log(model.kernel.pairwise(zs, data.prices))
            c_x = np.log(np.diagonal(model.kernel.pairwise(data.quantities, data.prices)))
        else:
            c_z = np.array([[cost(z, p) for p in data.prices] for z in zs])
            c_x = np.array([cost(x, p) for x, p in zip(data.quantities, data.prices)])
    else:
        s = model.solution.multipliers
        f_z = model.values(zs)
        f_x = model.values(data.quantities)
        c_z = (zs @ data.prices.T) * s[None, :]
        c_x = np.einsum("ij,ij->i", data.prices, data.quantities) * s
    return float(np.max(f_z[:, None] - f_x[None, :] - c_z + c_x[None, :]))


def check_superdifferential(
    model: Model,
    data: Dataset,
    cost: Callable[[NDArray[np.float64], NDArray[np.float64]], float] | None = None,
    samples: int = DEFAULT_SAMPLES,
    tolerance: float = DEFAULT_TOLERANCE,
    seed: int = DEFAULT_SEED,
) -> bool:
    """True iff every data pair lies in the c-superdifferential of the model."""
    return superdifferential_gap(model, data, cost, samples, seed) <= tolerance
