"""Pure-Python/numpy versions of the hot kernels.

These define the reference semantics; ``_kernels.pyx`` mirrors them operation
for operation so both backends return bitwise-identical results.
"""

from __future__ import annotations

import itertools

import numpy as np

BACKEND = "python"

_CHUNK = 1 << 16


def floyd_warshall(a, tol):
    """All-pairs relaxation with predecessor tracking and early stop.

    Returns ``(dist, pred, stop)`` where ``pred[i, j]`` is the node preceding
    ``j`` on the current best walk from ``i``, and ``stop`` is the pivot index
    after which some ``dist[i, i] < -tol`` appeared (``-1`` if none did).
    Row and column ``k`` are snapshotted before pivoting on ``k``.
    """
    d = np.array(a, dtype=np.float64, copy=True)
    n = d.shape[0]
    pred = np.repeat(np.arange(n, dtype=np.int64)[:, None], n, axis=1)
    for k in range(n):
        col = d[:, k].copy()
        row = d[k, :].copy()
        prow = pred[k, :].copy()
        cand = col[:, None] + row[None, :]
        better = cand < d
        d = np.where(better, cand, d)
        pred = np.where(better, prow[None, :], pred)
        if np.any(np.diagonal(d) < -tol):
            return d, pred, k
    return d, pred, -1


def transitive_closure(r):
    """Warshall's algorithm on a boolean adjacency matrix."""
    c = np.array(r, dtype=bool, copy=True)
    for k in range(c.shape[0]):
        c |= c[:, k, None] & c[None, k, :]
    return c


def hungarian(cost):
    """Shortest-augmenting-path Hungarian method for a square cost matrix.

    Returns ``(assignment, u, v)`` with ``assignment[i]`` the column given to
    row ``i`` and row/column potentials satisfying ``u[i] + v[j] <= cost[i, j]``
    with equality on the assignment.
    """
    c = np.asarray(cost, dtype=np.float64)
    n = c.shape[0]
    inf = float("inf")
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)
    rows = c.tolist()
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = inf
            j1 = 0
            ri = rows[i0 - 1]
            ui0 = u[i0]
            for j in range(1, n + 1):
                if not used[j]:
                    cur = ri[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    assignment = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        assignment[p[j] - 1] = j - 1
    return assignment, np.array(u[1:]), np.array(v[1:])


def brute_force_assignment(cost):
    """Lexicographically first permutation of minimal total cost.

    Sums are accumulated left to right over rows.
    """
    c = np.asarray(cost, dtype=np.float64)
    n = c.shape[0]
    best_val = float("inf")
    best_perm = None
    perms = itertools.permutations(range(n))
    while True:
        chunk = np.array(list(itertools.islice(perms, _CHUNK)), dtype=np.int64)
        if chunk.size == 0:
            break
        chunk = chunk.reshape(-1, n)
        total = c[0, chunk[:, 0]].copy()
        for i in range(1, n):
            total += c[i, chunk[:, i]]
        k = int(np.argmin(total))
        if total[k] < best_val:
            best_val = float(total[k])
            best_perm = chunk[k].copy()
    return best_perm, best_val
