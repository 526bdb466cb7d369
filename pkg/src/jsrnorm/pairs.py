"""Orthogonal hollowization of single matrices and of pairs.

A traceless matrix can be brought to zero diagonal by an orthogonal
similarity, and for a traceless pair one can make the first matrix hollow
while the second vanishes on all but its last two diagonal entries.  The
single-matrix case is done by the classical exact recursion; the pair is
found numerically by damped Gauss-Newton over rotation generators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from .auerbach import SimilarityTransform, normalize_entries
from .errors import InvalidInputError
from .matset import MatrixSet, as_matrix

ARMIJO_C = 1e-4
STALL_LIMIT = 2000
STALL_RTOL = 1e-6  # an iteration counts as stalled unless it lowers the best value by this fraction
MAX_RESTARTS = 5
DEFAULT_BUDGET = 10_000


@dataclass(frozen=True, eq=False)
class HollowizationResult:
    Qorth: np.ndarray
    residual_A: float
    residual_B: float
    iterations: int
    converged: bool
    restarts: int = 0
    history: tuple = ()  # objective after each accepted step


def trace_adjusted(A: np.ndarray) -> np.ndarray:
    d = A.shape[0]
    return A - np.trace(A) / d * np.eye(d)


def _householder_to(x: np.ndarray) -> np.ndarray:
    """Orthogonal symmetric ``H`` with ``H e_1 = x`` for a unit vector ``x``."""
    k = len(x)
    e1 = np.zeros(k)
    e1[0] = 1.0
    u = e1 - x
    nu = np.linalg.norm(u)
    if nu < 1e-15:
        return np.eye(k)
    u /= nu
    return np.eye(k) - 2.0 * np.outer(u, u)


def _hollow_recursion(C: np.ndarray) -> np.ndarray:
    k = C.shape[0]
    if k == 1:
        return np.eye(1)
    S = (C + C.T) / 2
    w, U = np.linalg.eigh(S)
    lo, hi = w[0], w[-1]
    if hi - lo <= 1e-300:
        x = np.eye(k)[:, 0]
    else:
        # cos^2 hi + sin^2 lo = 0 with lo <= 0 <= hi
        theta = np.arctan(sqrt(max(hi, 0.0) / max(-lo, 1e-300))) if lo < 0 else 0.0
        x = np.cos(theta) * U[:, -1] + np.sin(theta) * U[:, 0]
        x /= np.linalg.norm(x)
    H = _householder_to(x)
    C1 = H.T @ C @ H
    R = np.eye(k)
    R[1:, 1:] = _hollow_recursion(C1[1:, 1:] - np.trace(C1[1:, 1:]) / (k - 1) * np.eye(k - 1))
    return H @ R


def hollowize_single(A) -> HollowizationResult:
    """Orthogonal ``Q`` with ``diag(Q^T (A - tr(A)/d I) Q) = 0``."""
    A = as_matrix(A)
    Ah = trace_adjusted(A)
    Q = _hollow_recursion(Ah)
    res = float(np.max(np.abs(np.diag(Q.T @ Ah @ Q))))
    return HollowizationResult(Q, res, 0.0, 0, res <= 1e-10)


def _residuals(Q, Ah, Bh):
    d = Ah.shape[0]
    C = Q.T @ Ah @ Q
    D = Q.T @ Bh @ Q
    return np.concatenate([np.diag(C), np.diag(D)[:max(d - 2, 0)]]), C, D


def _jacobian(C, D, pairs):
    d = C.shape[0]
    nb = max(d - 2, 0)
    J = np.zeros((d + nb, len(pairs)))
    for k, (p, q) in enumerate(pairs):
        sc = C[p, q] + C[q, p]
        J[p, k] -= sc
        J[q, k] += sc
        sd = D[p, q] + D[q, p]
        if p < nb:
            J[d + p, k] -= sd
        if q < nb:
            J[d + q, k] += sd
    return J


def _cayley(X: np.ndarray) -> np.ndarray:
    d = X.shape[0]
    return np.linalg.solve(np.eye(d) - X / 2, np.eye(d) + X / 2)


def _reorthonormalize(Q: np.ndarray) -> np.ndarray:
    U, _, Vt = np.linalg.svd(Q)
    return U @ Vt


def hollowize_pair(A, B, tol: float = 1e-8, budget: int = DEFAULT_BUDGET, seed: int = 0) -> HollowizationResult:
    """Orthogonal ``Q`` making ``Q^T Â Q`` hollow and ``Q^T B̂ Q`` almost hollow (hats: trace-adjusted).

    Minimizes the sum of squares of the targeted diagonal entries.  Each step
    is a Levenberg-Marquardt direction in the rotation generators, applied
    through the Cayley map and accepted by Armijo backtracking.  After
    ``STALL_LIMIT`` iterations without a relative gain of ``STALL_RTOL`` on
    the best value the search restarts from a seeded random orthogonal
    matrix, at most ``MAX_RESTARTS`` times.
    """
    A, B = as_matrix(A), as_matrix(B)
    if A.shape != B.shape:
        raise InvalidInputError("A and B must have the same shape")
    d = A.shape[0]
    Ah, Bh = trace_adjusted(A), trace_adjusted(B)
    rng = np.random.default_rng(seed)
    pairs = [(p, q) for p in range(d) for q in range(p + 1, d)]
    Q = hollowize_single(A).Qorth
    r, C, D = _residuals(Q, Ah, Bh)
    f = float(r @ r)
    best = (f, Q, r)
    history = [f]
    lam = 1e-3
    stalled = restarts = it = 0
    while it < budget and np.max(np.abs(best[2]), initial=0.0) > tol:
        it += 1
        J = _jacobian(C, D, pairs)
        g = J.T @ r
        JtJ = J.T @ J
        step = -np.linalg.solve(JtJ + lam * (np.diag(np.diag(JtJ)) + 1e-12 * np.eye(len(pairs))), g)
        s = 1.0
        accepted = False
        while s > 1e-12:
            X = np.zeros((d, d))
            for k, (p, q) in enumerate(pairs):
                X[p, q] = s * step[k]
                X[q, p] = -s * step[k]
            Qn = _reorthonormalize(Q @ _cayley(X))
            rn, Cn, Dn = _residuals(Qn, Ah, Bh)
            fn = float(rn @ rn)
            if fn <= f + ARMIJO_C * s * float(g @ step) * 2:
                accepted = True
                break
            s *= 0.5
        if accepted:
            Q, r, C, D, f = Qn, rn, Cn, Dn, fn
            history.append(f)
            lam = max(lam * 0.3, 1e-12)
        else:
            lam *= 10.0
        if f < best[0] * (1 - STALL_RTOL):
            stalled = 0
        else:
            stalled += 1
        if f < best[0]:
            best = (f, Q, r)
        if stalled >= STALL_LIMIT and restarts < MAX_RESTARTS:
            restarts += 1
            stalled = 0
            Q = _reorthonormalize(rng.standard_normal((d, d)))
            r, C, D = _residuals(Q, Ah, Bh)
            f = float(r @ r)
            lam = 1e-3
    Qb = _reorthonormalize(best[1])
    rb, Cb, Db = _residuals(Qb, Ah, Bh)
    resA = float(np.max(np.abs(np.diag(Cb))))
    resB = float(np.max(np.abs(np.diag(Db)[:max(d - 2, 0)]), initial=0.0))
    return HollowizationResult(Qb, resA, resB, it, resA <= tol and resB <= tol, restarts, tuple(history))


@dataclass
class PairReport:
    rho_upper: float
    certified: bool
    max_entry_before: float
    row_norms: list = field(default_factory=list)
    col_norms: list = field(default_factory=list)
    sqrt_d_bound: float = 0.0
    row_col_within_sqrt_d: bool = False
    traces: tuple = ()
    trace_bound: float = 0.0
    traces_within_bound: bool = False
    hollow_residual_A: float = 0.0
    hollow_residual_B: float = 0.0
    converged: bool = False
    partial: bool = False

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def normalize_pair(A, B, depth: int, tol: float = 1e-8, word=None, seed: int = 0):
    """Entry normalization followed by orthogonal hollowization of the pair.

    Returns ``(SimilarityTransform, (A', B'), PairReport)`` where ``A' - tr(A)/d I``
    has zero diagonal and ``B' - tr(B)/d I`` is almost hollow when converged.
    The row/column norm bound ``sqrt(d) rho`` is measured, not assumed.
    """
    A, B = as_matrix(A), as_matrix(B)
    if A.shape != B.shape:
        raise InvalidInputError("A and B must have the same shape")
    d = A.shape[0]
    Tr, _, rep = normalize_entries(MatrixSet([A, B]), depth, word=word, seed=seed)
    A1, B1 = Tr.conj(A), Tr.conj(B)
    rho = rep.rho_upper
    before = float(max(np.max(np.abs(A1)), np.max(np.abs(B1))))
    H = hollowize_pair(A1, B1, tol=tol, seed=seed)
    Tfin = SimilarityTransform(Tr.T @ H.Qorth, H.Qorth.T @ Tr.T_inv)
    A2, B2 = Tfin.conj(A), Tfin.conj(B)
    rows = [float(x) for X in (A2, B2) for x in np.linalg.norm(X, axis=1)]
    cols = [float(x) for X in (A2, B2) for x in np.linalg.norm(X, axis=0)]
    traces = (float(np.trace(A)), float(np.trace(B)))
    report = PairReport(
        rho_upper=rho,
        certified=rep.certified,
        max_entry_before=before,
        row_norms=rows,
        col_norms=cols,
        sqrt_d_bound=sqrt(d) * rho,
        row_col_within_sqrt_d=max(rows + cols) <= sqrt(d) * rho * (1 + 1e-9),
        traces=traces,
        trace_bound=d * rho,
        traces_within_bound=max(abs(t) for t in traces) <= d * rho * (1 + 1e-9),
        hollow_residual_A=H.residual_A,
        hollow_residual_B=H.residual_B,
        converged=H.converged,
        partial=not H.converged,
    )
    return Tfin, (A2, B2), report
