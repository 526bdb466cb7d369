"""Dense two-phase simplex with Bland's rule, for the tiny LPs in this package.

Problems have at most a few hundred constraints and a handful of variables,
so a full tableau is cheap; Bland's rule rules out cycling and makes the
pivot sequence (and hence the returned vertex) deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailureError

PIVOT_TOL = 1e-11


class InfeasibleLPError(NumericalFailureError):
    pass


class UnboundedLPError(NumericalFailureError):
    pass


@dataclass(frozen=True, eq=False)
class LPResult:
    x: np.ndarray
    fun: float
    iterations: int


def _pivot(T: np.ndarray, basis: list[int], r: int, c: int) -> None:
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    basis[r] = c


def _run(T: np.ndarray, basis: list[int], ncols: int, max_iter: int) -> int:
    """Minimize the objective held in the last row of ``T`` over columns ``< ncols``."""
    it = 0
    m = T.shape[0] - 1
    while True:
        red = T[-1, :ncols]
        enter = np.nonzero(red < -PIVOT_TOL)[0]
        if len(enter) == 0:
            return it
        c = int(enter[0])
        colv = T[:m, c]
        pos = np.nonzero(colv > PIVOT_TOL)[0]
        if len(pos) == 0:
            raise UnboundedLPError("LP is unbounded")
        ratios = T[pos, -1] / colv[pos]
        best = np.min(ratios)
        tied = pos[ratios <= best + 1e-14 * max(1.0, abs(best))]
        r = int(min(tied, key=lambda i: basis[i]))
        _pivot(T, basis, r, c)
        it += 1
        if it > max_iter:
            raise NumericalFailureError("simplex iteration limit reached")


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, free=None, max_iter: int = 10_000) -> LPResult:
    """Minimize ``c @ x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``.

    Variables are nonnegative unless flagged in the boolean mask ``free``.
    """
    c = np.asarray(c, dtype=float)
    n = len(c)
    free = np.zeros(n, dtype=bool) if free is None else np.asarray(free, dtype=bool)
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)

    # split free variables x = x+ - x-
    fidx = np.nonzero(free)[0]
    split = lambda A: np.hstack([A, -A[:, fidx]])
    cs = np.concatenate([c, -c[fidx]])
    Aub, Aeq = split(A_ub), split(A_eq)
    nv = len(cs)
    mu, me = len(b_ub), len(b_eq)
    m = mu + me

    # rows: [structural | slacks | artificials | rhs]
    A = np.zeros((m, nv + mu))
    A[:mu, :nv] = Aub
    A[:mu, nv:] = np.eye(mu)
    A[mu:, :nv] = Aeq
    b = np.concatenate([b_ub, b_eq])
    neg = b < 0
    A[neg] *= -1
    b = np.where(neg, -b, b)

    basis: list[int] = [-1] * m
    need_art = []
    for i in range(m):
        if i < mu and not neg[i]:
            basis[i] = nv + i
        else:
            need_art.append(i)
    na = len(need_art)
    ncol = nv + mu + na
    T = np.zeros((m + 1, ncol + 1))
    T[:m, :nv + mu] = A
    T[:m, -1] = b
    for k, i in enumerate(need_art):
        T[i, nv + mu + k] = 1.0
        basis[i] = nv + mu + k

    it = 0
    if na:
        T[-1, nv + mu:ncol] = 1.0
        for i in need_art:
            T[-1] -= T[i]
        it += _run(T, basis, ncol, max_iter)
        if -T[-1, -1] > 1e-9 * max(1.0, float(np.max(np.abs(b)))):
            raise InfeasibleLPError("LP is infeasible")
        # drive artificials out of the basis, dropping redundant rows
        keep = []
        for i in range(m):
            if basis[i] >= nv + mu:
                cand = np.nonzero(np.abs(T[i, :nv + mu]) > PIVOT_TOL)[0]
                if len(cand):
                    _pivot(T, basis, i, int(cand[0]))
                    keep.append(i)
            else:
                keep.append(i)
        T = np.vstack([T[keep], T[-1:]])
        basis = [basis[i] for i in keep]
        T = np.delete(T, np.s_[nv + mu:ncol], axis=1)
        m = len(basis)

    T[-1] = 0.0
    T[-1, :nv] = cs
    for i, bi in enumerate(basis):
        if T[-1, bi] != 0.0:
            T[-1] -= T[-1, bi] * T[i]
    it += _run(T, basis, nv + mu, max_iter)

    xs = np.zeros(nv + mu)
    for i, bi in enumerate(basis):
        xs[bi] = T[i, -1]
    x = xs[:n].copy()
    x[fidx] -= xs[n:nv]
    return LPResult(x=x, fun=float(c @ x), iterations=it)


def minimax_affine(G: np.ndarray, h: np.ndarray) -> LPResult:
    """Minimize ``max_k |G[k] @ y + h[k]|`` over free ``y``.

    Returns ``x = (y, s)`` with ``s`` the optimal value.  The bound is
    written as ``s = s0 + t`` with ``s0 = max |h|`` (the value at ``y = 0``),
    which makes every right-hand side nonnegative, so the slack basis is
    feasible and no phase 1 is needed.
    """
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    K, p = G.shape
    s0 = float(np.max(np.abs(h))) if K else 0.0
    ones = np.ones((K, 1))
    A_ub = np.vstack([np.hstack([G, -ones]), np.hstack([-G, -ones])])
    b_ub = np.maximum(np.concatenate([s0 - h, s0 + h]), 0.0)
    c = np.zeros(p + 1)
    c[-1] = 1.0
    res = linprog(c, A_ub, b_ub, free=np.ones(p + 1, dtype=bool))
    x = res.x.copy()
    x[-1] = float(np.max(np.abs(G @ x[:p] + h))) if K else 0.0
    return LPResult(x=x, fun=x[-1], iterations=res.iterations)
