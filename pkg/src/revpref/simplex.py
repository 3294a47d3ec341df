"""Dense two-phase simplex with Bland's anti-cycling rule.

Solves ``min c @ x`` subject to ``A_ub @ x <= b_ub``, ``A_eq @ x == b_eq`` and
``x >= 0``.  Intended for the small, dense feasibility problems built by
:mod:`revpref.utility`; it favours predictability over speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = ["LPError", "LPResult", "two_phase_simplex"]

_PIVOT_EPS = 1e-12


class LPError(RuntimeError):
    """The solver could not reach a trustworthy answer."""


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: NDArray[np.float64] | None
    objective: float | None
    phase1_objective: float
    iterations: int


def _pivot(t: NDArray[np.float64], row: int, col: int) -> None:
    t[row] /= t[row, col]
    factor = t[:, col].copy()
    factor[row] = 0.0
    t -= np.outer(factor, t[row])


def _run(t, basis, n_cols, tol, max_iter, iters):
    """Bland-rule iterations on tableau ``t`` whose last row is the objective."""
    m = t.shape[0] - 1
    while True:
        if iters >= max_iter:
            raise LPError(f"simplex did not converge within {max_iter} pivots")
        reduced = t[-1, :n_cols]
        entering = np.flatnonzero(reduced < -tol)
        if entering.size == 0:
            return "optimal", iters
        col = int(entering[0])
        column = t[:m, col]
        rows = np.flatnonzero(column > _PIVOT_EPS)
        if rows.size == 0:
            return "unbounded", iters
        ratios = t[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(t, row, col)
        basis[row] = col
        iters += 1


def two_phase_simplex(
    c: ArrayLike,
    A_ub: ArrayLike | None = None,
    b_ub: ArrayLike | None = None,
    A_eq: ArrayLike | None = None,
    b_eq: ArrayLike | None = None,
    tol: float = 1e-9,
    max_iter: int = 50_000,
) -> LPResult:
    c = np.asarray(c, dtype=np.float64)
    nv = c.size
    blocks, rhs, slack_sign = [], [], []
    if A_ub is not None:
        A_ub = np.atleast_2d(np.asarray(A_ub, dtype=np.float64))
        blocks.append(A_ub)
        rhs.append(np.asarray(b_ub, dtype=np.float64))
        slack_sign.append(np.ones(A_ub.shape[0]))
    if A_eq is not None:
        A_eq = np.atleast_2d(np.asarray(A_eq, dtype=np.float64))
        blocks.append(A_eq)
        rhs.append(np.asarray(b_eq, dtype=np.float64))
        slack_sign.append(np.zeros(A_eq.shape[0]))
    if not blocks:
        x = np.zeros(nv)
        if np.any(c < 0):
            return LPResult("unbounded", None, None, 0.0, 0)
        return LPResult("optimal", x, 0.0, 0.0, 0)

    A = np.vstack(blocks)
    b = np.concatenate(rhs)
    sign = np.concatenate(slack_sign)
    m = A.shape[0]
    n_ub = int(np.count_nonzero(sign))
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise LPError("constraint data is not finite")

    # columns: [x | slacks for <= rows | artificials]; rows flipped so b >= 0
    flip = b < 0
    slack = np.zeros((m, n_ub))
    slack[np.flatnonzero(sign), np.arange(n_ub)] = 1.0
    A_std = np.hstack([A, slack])
    A_std[flip] *= -1.0
    b_std = np.where(flip, -b, b)

    needs_art = np.ones(m, dtype=bool)
    basis = [-1] * m
    ub_rows = np.flatnonzero(sign)
    for k, r in enumerate(ub_rows):
        if not flip[r]:
            needs_art[r] = False
            basis[r] = nv + k
    art_rows = np.flatnonzero(needs_art)
    n_art = art_rows.size
    n_struct = nv + n_ub
    n_cols = n_struct + n_art

    t = np.zeros((m + 1, n_cols + 1))
    t[:m, :n_struct] = A_std
    for k, r in enumerate(art_rows):
        t[r, n_struct + k] = 1.0
        basis[r] = n_struct + k
    t[:m, -1] = b_std

    # phase 1: minimise the sum of artificials
    t[-1, n_struct:n_cols] = 1.0
    for r in art_rows:
        t[-1] -= t[r]
    status, iters = _run(t, basis, n_cols, tol, max_iter, 0)
    phase1 = float(-t[-1, -1])
    scale = max(1.0, float(np.abs(b_std).max(initial=0.0)))
    if phase1 > tol * scale:
        return LPResult("infeasible", None, None, phase1, iters)

    # drive zero-level artificials out of the basis; drop redundant rows
    keep = []
    for r in range(m):
        if basis[r] >= n_struct:
            cand = np.flatnonzero(np.abs(t[r, :n_struct]) > 1e-9)
            if cand.size == 0:
                continue
            _pivot(t, r, int(cand[0]))
            basis[r] = int(cand[0])
            iters += 1
        keep.append(r)
    t = np.vstack([t[keep][:, list(range(n_struct)) + [n_cols]], np.zeros((1, n_struct + 1))])
    basis = [basis[r] for r in keep]

    # phase 2: original objective expressed in the current basis
    t[-1, :nv] = c
    for r, bv in enumerate(basis):
        if t[-1, bv] != 0.0:
            t[-1] -= t[-1, bv] * t[r]
    status, iters = _run(t, basis, n_struct, tol, max_iter, iters)
    if status == "unbounded":
        return LPResult("unbounded", None, None, phase1, iters)

    x = np.zeros(n_struct)
    for r, bv in enumerate(basis):
        x[bv] = t[r, -1]
    if np.any(x < -1e-7 * scale):
        raise LPError("simplex produced a significantly negative basic variable")
    x = np.maximum(x, 0.0)[:nv]
    return LPResult("optimal", x, float(c @ x), phase1, iters)
