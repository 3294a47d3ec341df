"""Revealed-preference graph and rationalizability verdicts.

The graph has one node per observation and an edge ``i -> j`` weighted by

    a[i, j] = ln b(X^j, P^i) - ln b(X^i, P^i),

the log-cost of moving bundle ``j`` into budget ``i``.  The data admit a
homogeneous rationalization exactly when no cycle has negative total weight.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import kernels
from .core import INNER, Dataset, InputError, Kernel

__all__ = [
    "DEFAULT_TOLERANCE",
    "ORACLE_CAP",
    "CapExceeded",
    "Status",
    "CrossLogMatrix",
    "Verdict",
    "cross_log_matrix",
    "check_harp",
    "harp_from_matrix",
    "brute_force_cycle_check",
    "check_cyclical_monotonicity",
    "check_garp",
    "enumerate_simple_cycles",
]

DEFAULT_TOLERANCE = 1e-9
ORACLE_CAP = 8


class CapExceeded(ValueError):
    """An exhaustive oracle was asked to enumerate beyond its size cap."""


class Status(str, enum.Enum):
    RATIONALIZABLE = "rationalizable"
    VIOLATED = "violated"


@dataclass(frozen=True, eq=False)
class CrossLogMatrix:
    a: NDArray[np.float64]

    def __post_init__(self):
        a = np.array(self.a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputError(f"cross-log matrix must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InputError("cross-log matrix has non-finite entries")
        if np.any(np.diagonal(a) != 0.0):
            raise InputError("cross-log matrix must have an exactly zero diagonal")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def cycle_sum(self, cycle: Sequence[int]) -> float:
        """Total weight of the closed walk ``cycle[0] -> cycle[1] -> ... -> cycle[0]``."""
        cyc = list(cycle)
        return float(sum(self.a[cyc[k], cyc[(k + 1) % len(cyc)]] for k in range(len(cyc))))


@dataclass(frozen=True)
class Verdict:
    """Outcome of a rationalizability check.

    ``witness`` is a cycle of observation indices (0-based) whose weight
    ``cycle_sum`` is negative beyond the tolerance; it is ``None`` for
    rationalizable data.  ``min_cycle_sum`` is the smallest cycle weight seen
    when the checker computes it.
    """

    status: Status
    method: str
    tolerance: float
    witness: tuple[int, ...] | None = None
    cycle_sum: float | None = None
    min_cycle_sum: float | None = None
    notes: tuple[str, ...] = field(default=())

    @property
    def rationalizable(self) -> bool:
        return self.status is Status.RATIONALIZABLE

    def __bool__(self) -> bool:
        return self.rationalizable

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "method": self.method,
            "tolerance": self.tolerance,
            "witness": None if self.witness is None else list(self.witness),
            "cycle_sum": self.cycle_sum,
            "min_cycle_sum": self.min_cycle_sum,
            "notes": list(self.notes),
        }


def _canonical(cycle: Sequence[int]) -> tuple[int, ...]:
    cyc = [int(c) for c in cycle]
    k = cyc.index(min(cyc))
    return tuple(cyc[k:] + cyc[:k])


def cross_log_matrix(data: Dataset, kernel: Kernel = INNER) -> CrossLogMatrix:
    """``a[i, j] = ln b(X^j, P^i) - ln b(X^i, P^i)`` with an exact zero diagonal."""
    b = kernel.pairwise(data.quantities, data.prices).T
    if not np.all(b > 0) or not np.all(np.isfinite(b)):
        raise InputError(f"kernel {kernel.tag} produced nonpositive or non-finite values")
    logs = np.log(b)
    a = logs - np.diagonal(logs)[:, None]
    np.fill_diagonal(a, 0.0)
    return CrossLogMatrix(a)


def _cycle_from_pred(pred: NDArray[np.int64], root: int) -> list[int]:
    # pred[root, j] is the node before j on the best walk from root.
    seq = [root]
    seen = {root: 0}
    cur = root
    while True:
        cur = int(pred[root, cur])
        if cur in seen:
            s = seen[cur]
            back = seq[s:]
            return [back[0]] + back[:0:-1]
        seen[cur] = len(seq)
        seq.append(cur)


def _bellman_ford_cycle(a: NDArray[np.float64], tol: float) -> list[int] | None:
    n = a.shape[0]
    dist = np.zeros(n)
    pred = np.arange(n)
    last = -1
    for _ in range(n):
        last = -1
        for i in range(n):
            for j in range(n):
                if i != j and dist[i] + a[i, j] < dist[j] - tol / n:
                    dist[j] = dist[i] + a[i, j]
                    pred[j] = i
                    last = j
        if last < 0:
            return None
    x = last
    for _ in range(n):
        x = int(pred[x])
    cycle = [x]
    y = int(pred[x])
    while y != x:
        cycle.append(y)
        y = int(pred[y])
    cycle.reverse()
    return cycle


def harp_from_matrix(cm: CrossLogMatrix, tolerance: float = DEFAULT_TOLERANCE) -> Verdict:
    """Negative-cycle test on a prebuilt cross-log matrix (Floyd-Warshall)."""
    if tolerance < 0:
        raise InputError("tolerance must be nonnegative")
    a = cm.a
    n = cm.n
    dist, pred, stop = kernels.floyd_warshall(a, tolerance)
    method = f"floyd-warshall[{kernels.BACKEND}]"
    if stop < 0:
        notes = []
        min_sum = None
        if n >= 2:
            closing = dist + a.T
            np.fill_diagonal(closing, np.inf)
            min_sum = float(closing.min())
            if min_sum <= tolerance:
                notes.append(
                    f"a cycle attains equality within tolerance (minimum cycle sum {min_sum:.6g}); "
                    "reported as rationalizable"
                )
        return Verdict(Status.RATIONALIZABLE, method, tolerance, min_cycle_sum=min_sum, notes=tuple(notes))

    candidates = []
    for root in np.flatnonzero(np.diagonal(dist) < -tolerance):
        candidates.append(_cycle_from_pred(pred, int(root)))
    for cycle in candidates:
        s = cm.cycle_sum(cycle)
        if s < -tolerance:
            cyc = _canonical(cycle)
            return Verdict(Status.VIOLATED, method, tolerance, cyc, cm.cycle_sum(cyc))

    cycle = _bellman_ford_cycle(a, tolerance)
    if cycle is not None and cm.cycle_sum(cycle) < -tolerance:
        cyc = _canonical(cycle)
        return Verdict(
            Status.VIOLATED, method, tolerance, cyc, cm.cycle_sum(cyc),
            notes=("witness recovered by Bellman-Ford",),
        )
    if n <= ORACLE_CAP:
        v = _brute_force_on_matrix(cm, tolerance)
        return Verdict(
            v.status, method, tolerance, v.witness, v.cycle_sum, v.min_cycle_sum,
            notes=("negative walk found only within the tolerance band; settled by cycle enumeration",),
        )
    return Verdict(
        Status.RATIONALIZABLE, method, tolerance,
        notes=("negative walks exist but no simple cycle below -tolerance was recovered",),
    )


def check_harp(data: Dataset, kernel: Kernel = INNER, tolerance: float = DEFAULT_TOLERANCE) -> Verdict:
    """Decide the homogeneous axiom of revealed preference.

    Rationalizable iff the revealed-preference graph has no cycle with sum
    below ``-tolerance``.  A violation carries a witness cycle.

    >>> from revpref.core import Dataset
    >>> d = Dataset.from_arrays([[10, 1], [1, 10]], [[10, 1], [1, 10]])
    >>> v = check_harp(d)
    >>> v.status.value, v.witness, round(v.cycle_sum, 3)
    ('violated', (0, 1), -3.239)
    """
    return harp_from_matrix(cross_log_matrix(data, kernel), tolerance)


def enumerate_simple_cycles(n: int):
    """Yield every simple cycle of length >= 2 on ``n`` nodes exactly once.

    Each cycle starts at its smallest node; neighbours are visited in
    ascending order, so the enumeration order is deterministic.
    """
    for start in range(n):
        path = [start]
        on_path = [False] * n
        on_path[start] = True

        def extend():
            last = path[-1]
            for nxt in range(start + 1, n):
                if on_path[nxt]:
                    continue
                path.append(nxt)
                on_path[nxt] = True
                yield tuple(path)
                yield from extend()
                on_path[nxt] = False
                path.pop()

        yield from extend()


def _brute_force_on_matrix(cm: CrossLogMatrix, tolerance: float) -> Verdict:
    a = cm.a
    witness = None
    witness_sum = None
    min_sum = None
    for cyc in enumerate_simple_cycles(cm.n):
        s = float(sum(a[cyc[k], cyc[(k + 1) % len(cyc)]] for k in range(len(cyc))))
        if min_sum is None or s < min_sum:
            min_sum = s
        if witness is None and s < -tolerance:
            witness, witness_sum = cyc, s
    if witness is None:
        notes = ()
        if min_sum is not None and min_sum <= tolerance:
            notes = (f"a cycle attains equality within tolerance (minimum cycle sum {min_sum:.6g})",)
        return Verdict(Status.RATIONALIZABLE, "cycle-enumeration", tolerance, min_cycle_sum=min_sum, notes=notes)
    return Verdict(Status.VIOLATED, "cycle-enumeration", tolerance, witness, witness_sum, min_sum)


def brute_force_cycle_check(
    data: Dataset,
    kernel: Kernel = INNER,
    tolerance: float = DEFAULT_TOLERANCE,
    cap: int = ORACLE_CAP,
) -> Verdict:
    """Exhaustive HARP check over all simple cycles; an oracle for small ``n``."""
    if data.n > cap:
        raise CapExceeded(f"cycle enumeration refuses n={data.n} > cap={cap}")
    return _brute_force_on_matrix(cross_log_matrix(data, kernel), tolerance)


def check_cyclical_monotonicity(
    points: Sequence[tuple[ArrayLike, ArrayLike]],
    cost: Callable[[NDArray[np.float64], NDArray[np.float64]], float],
    tolerance: float = DEFAULT_TOLERANCE,
    cap: int = ORACLE_CAP,
) -> Verdict:
    """Check ``sum c(x_i, y_i) <= sum c(x_i, y_sigma(i)) + tolerance`` over all permutations.

    On violation the witness is the most negative cycle of the best
    permutation, written in the graph convention of :func:`cross_log_matrix`
    (edge ``k -> l`` pairs ``x_l`` with ``y_k``).
    """
    n = len(points)
    if n > cap:
        raise CapExceeded(f"permutation enumeration refuses n={n} > cap={cap}")
    xs = [np.asarray(x, dtype=np.float64) for x, _ in points]
    ys = [np.asarray(y, dtype=np.float64) for _, y in points]
    m = np.array([[cost(xs[i], ys[j]) for j in range(n)] for i in range(n)], dtype=np.float64)
    if n == 0:
        return Verdict(Status.RATIONALIZABLE, "permutation-enumeration", tolerance)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    rows = np.arange(n)
    total = m[rows[0], perms[:, 0]] - m[0, 0]
    for i in range(1, n):
        total = total + (m[i, perms[:, i]] - m[i, i])
    k = int(np.argmin(total))
    best = float(total[k])
    if best >= -tolerance:
        return Verdict(Status.RATIONALIZABLE, "permutation-enumeration", tolerance, min_cycle_sum=best)
    sigma = perms[k]
    seen = [False] * n
    witness, witness_sum = None, None
    for s0 in range(n):
        if seen[s0] or sigma[s0] == s0:
            continue
        cyc = []
        x = s0
        while not seen[x]:
            seen[x] = True
            cyc.append(x)
            x = int(sigma[x])
        val = float(sum(m[l, sigma[l]] - m[l, l] for l in cyc))
        if witness_sum is None or val < witness_sum:
            # edge k -> l uses sigma(l) = k, so walk sigma backwards
            witness, witness_sum = _canonical([cyc[0]] + cyc[:0:-1]), val
    return Verdict(Status.VIOLATED, "permutation-enumeration", tolerance, witness, witness_sum, best)


def _hop_path(adj: NDArray[np.bool_], src: int, dst: int) -> list[int]:
    prev = {src: src}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if u == dst:
            break
        for v in np.flatnonzero(adj[u]):
            v = int(v)
            if v not in prev:
                prev[v] = u
                queue.append(v)
    path = [dst]
    while path[-1] != src:
        path.append(prev[path[-1]])
    return path[::-1]


def check_garp(data: Dataset, tolerance: float = DEFAULT_TOLERANCE) -> Verdict:
    """Generalized axiom of revealed preference via Warshall's transitive closure.

    ``i R0 j`` iff ``<P^i, X^i> >= <P^i, X^j> - tolerance``; a violation is a
    pair with ``i R j`` (closure) and ``<P^j, X^j> > <P^j, X^i> + tolerance``.
    The witness is the revealed chain ``i -> ... -> j`` closed by ``j -> i``;
    its ``cycle_sum`` is measured on the cross-log matrix.
    """
    e = data.prices @ data.quantities.T
    own = np.diagonal(e)
    r0 = own[:, None] >= e - tolerance
    np.fill_diagonal(r0, True)
    r = kernels.transitive_closure(r0)
    strict = own[:, None] > e + tolerance  # strict[j, i]: X^j strictly revealed preferred to X^i
    bad = r & strict.T
    method = f"garp-warshall[{kernels.BACKEND}]"
    if not bad.any():
        return Verdict(Status.RATIONALIZABLE, method, tolerance)
    i, j = (int(t) for t in np.argwhere(bad)[0])
    path = _hop_path(r0, i, j)
    cyc = _canonical(path)
    return Verdict(Status.VIOLATED, method, tolerance, cyc, cross_log_matrix(data).cycle_sum(cyc))
