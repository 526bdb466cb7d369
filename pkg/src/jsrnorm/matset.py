"""Finite matrix sets, product enumeration and two-sided JSR estimates.

Products follow the convention ``S = A(t-1) ... A(0)``: a word
``(w0, ..., w_{t-1})`` stands for ``M[w0] @ M[w1] @ ... @ M[w_{t-1}]``, so the
rightmost letter acts first on a vector.  All products are formed
right-nested with :func:`bmm`, whose per-entry summation order does not depend
on how many products are batched together.  This makes pruned and exhaustive
runs agree bit-for-bit.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import BudgetExceededError, DimensionMismatchError, InvalidInputError
from .polytope import PolytopalNorm

DEFAULT_BUDGET = 10**7
PRUNE_SLACK = 1e-12
DEDUP_TOL = 1e-12
_CHUNK = 1 << 15


def as_matrix(A) -> np.ndarray:
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise InvalidInputError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("matrix has non-finite entries")
    return A


class MatrixSet:
    """Nonempty finite set of real ``d x d`` matrices, deduplicated on construction.

    Two matrices are identified when they agree entrywise up to ``1e-12``
    times the larger of their max-abs entries.  ``A`` and ``-A`` stay distinct.
    """

    def __init__(self, members: Sequence, dedup_tol: float = DEDUP_TOL):
        mats = [as_matrix(A) for A in members]
        if not mats:
            raise InvalidInputError("matrix set must be nonempty")
        d = mats[0].shape[0]
        if any(A.shape[0] != d for A in mats):
            raise DimensionMismatchError("matrices of different dimensions")
        kept: list[np.ndarray] = []
        for A in mats:
            sa = np.max(np.abs(A))
            if not any(np.max(np.abs(A - B)) <= dedup_tol * max(sa, np.max(np.abs(B))) for B in kept):
                kept.append(A)
        self.matrices = np.array(kept)
        self.matrices.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    @property
    def members(self) -> list[np.ndarray]:
        return list(self.matrices)

    def __len__(self) -> int:
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)

    def __getitem__(self, i) -> np.ndarray:
        return self.matrices[i]

    def __repr__(self) -> str:
        return f"MatrixSet(dim={self.dim}, size={len(self)})"

    def scaled(self, c: float) -> "MatrixSet":
        return MatrixSet(self.matrices * c)

    def conjugated(self, T, T_inv=None) -> "MatrixSet":
        """The set ``T^{-1} M T``."""
        T = np.asarray(T, dtype=float)
        Ti = np.linalg.inv(T) if T_inv is None else T_inv
        return MatrixSet([Ti @ A @ T for A in self.matrices])

    def principal(self, J: Sequence[int]) -> "MatrixSet":
        """The set of principal submatrices ``A[J, J]`` (0-based indices)."""
        J = list(J)
        return MatrixSet([A[np.ix_(J, J)] for A in self.matrices])


def bmm(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Batched matrix product with a fixed per-entry summation order."""
    out = A[..., :, 0, None] * B[..., None, 0, :]
    for k in range(1, A.shape[-1]):
        out = out + A[..., :, k, None] * B[..., None, k, :]
    return out


def word_product(M: MatrixSet, word: Sequence[int]) -> np.ndarray:
    """``M[w0] @ ... @ M[w_{t-1}]``, formed right-nested."""
    word = list(word)
    if not word:
        raise InvalidInputError("empty word")
    if any(not 0 <= w < len(M) for w in word):
        raise InvalidInputError(f"word {word} has letters outside 0..{len(M) - 1}")
    P = M.matrices[word[-1]]
    for w in reversed(word[:-1]):
        P = bmm(M.matrices[w], P)
    return P


# -- spectral radius ---------------------------------------------------------

def spectral_radii(stack: np.ndarray) -> np.ndarray:
    """Spectral radii of a ``(k, d, d)`` stack.

    ``d <= 2`` uses the characteristic polynomial in closed form; larger
    ``d`` uses LAPACK's shifted Hessenberg QR through ``numpy.linalg.eigvals``.
    """
    stack = np.asarray(stack, dtype=float)
    d = stack.shape[-1]
    if d == 1:
        return np.abs(stack[:, 0, 0])
    if d == 2:
        a, b = stack[:, 0, 0], stack[:, 0, 1]
        c, e = stack[:, 1, 0], stack[:, 1, 1]
        half = 0.5 * (a + e)
        det = a * e - b * c
        disc = half * half - det
        real = np.abs(half) + np.sqrt(np.maximum(disc, 0.0))
        cplx = np.sqrt(np.maximum(det, 0.0))
        return np.where(disc >= 0, real, cplx)
    return np.max(np.abs(np.linalg.eigvals(stack)), axis=-1)


def spectral_radius(A) -> float:
    A = as_matrix(A)
    if A.shape[0] > 8:
        raise InvalidInputError("spectral_radius is meant for d <= 8")
    return float(spectral_radii(A[None])[0])


# -- norms -------------------------------------------------------------------

class EuclideanNorm:
    """The Euclidean vector norm and its spectral operator norm."""

    def __init__(self, dim: int):
        self.dim = dim

    def norm(self, x) -> float:
        return float(np.linalg.norm(x))

    def operator_norm(self, A) -> float:
        return float(np.linalg.norm(np.asarray(A, dtype=float), 2))

    def operator_norms(self, stack: np.ndarray) -> np.ndarray:
        return np.linalg.norm(stack, ord=2, axis=(-2, -1))


def operator_norm(A, N) -> float:
    """Induced norm of ``A``; for polytopal ``N`` the max is taken over vertex reps."""
    A = as_matrix(A)
    if N.dim != A.shape[0]:
        raise DimensionMismatchError(f"{A.shape} matrix against a {N.dim}-dim norm")
    if isinstance(N, PolytopalNorm):
        F, V = N.ball.facet_reps, N.ball.vertex_reps
        return float(np.max(np.abs(bmm(bmm(F[None], A[None]), V.T[None]))))
    return N.operator_norm(A)


def _stack_norms(N, stack: np.ndarray) -> np.ndarray:
    if isinstance(N, PolytopalNorm):
        F, V = N.ball.facet_reps, N.ball.vertex_reps
        vals = bmm(bmm(np.broadcast_to(F, (len(stack),) + F.shape), stack), V.T)
        return np.max(np.abs(vals).reshape(len(stack), -1), axis=1)
    return N.operator_norms(stack)


# -- enumeration -------------------------------------------------------------

def enumerate_products(M: MatrixSet, t: int, budget: int = DEFAULT_BUDGET) -> Iterator[tuple[tuple, np.ndarray]]:
    """Yield ``(word, product)`` for all ``|M|^t`` words in lexicographic order."""
    if t < 1:
        raise InvalidInputError("product length must be >= 1")
    count = len(M) ** t
    if count > budget:
        raise BudgetExceededError(f"|M|^t = {len(M)}^{t} = {count} exceeds budget {budget}", count)
    for word in itertools.product(range(len(M)), repeat=t):
        yield word, word_product(M, word)


@dataclass(frozen=True)
class JsrBounds:
    lower: float
    upper: float
    depth: int
    pruned: int = 0
    evaluated: int = 0
    partial: bool = False
    best_word: tuple = ()
    level_uppers: tuple = field(default=())

    def __post_init__(self):
        if self.lower > self.upper + 1e-12 * max(1.0, self.upper):
            raise ValueError(f"inconsistent bounds {self.lower} > {self.upper}")

    def same_estimate(self, other: "JsrBounds") -> bool:
        """Equality of every field that must not depend on pruning."""
        return (self.lower == other.lower and self.upper == other.upper and self.depth == other.depth
                and self.best_word == other.best_word and self.level_uppers == other.level_uppers)


def _threads() -> int:
    env = os.environ.get("JSR_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _best_index(values: np.ndarray, words: np.ndarray) -> int:
    """Index of the max value, lexicographically smallest word on ties."""
    top = np.max(values)
    cand = np.nonzero(values == top)[0]
    if len(cand) == 1:
        return int(cand[0])
    sub = words[cand]
    order = np.lexsort(sub.T[::-1])
    return int(cand[order[0]])


def jsr_bounds(M: MatrixSet, depth: int, N=None, budget: int = DEFAULT_BUDGET,
               prune: bool = True, threads: int | None = None) -> JsrBounds:
    """Two-sided JSR estimate from all products up to length ``depth``.

    lower = max_t max_{S in S_t} rho(S)^{1/t};  upper = min_t (max_{S in S_t} ||S||)^{1/t}.

    With ``prune`` a product ``S`` of length ``t`` is not extended when
    ``(mu^{t'-t} ||S||)^{1/t'} < lower - 1e-12`` for every ``t' in (t, depth]``,
    ``mu`` being the largest member norm.  None of its descendants can then
    reach either maximum, because ``max_{S_t'} ||S|| >= rho(M)^{t'} >= lower^{t'}``.
    If the budget would be exceeded the result covers the completed levels
    and is flagged ``partial``.
    """
    if depth < 1:
        raise InvalidInputError("depth must be >= 1")
    if N is None:
        N = EuclideanNorm(M.dim)
    elif N.dim != M.dim:
        raise DimensionMismatchError("norm and matrix set dimensions differ")
    mats = np.ascontiguousarray(M.matrices)
    k = len(mats)
    nthreads = _threads() if threads is None else max(1, threads)
    pool = ThreadPoolExecutor(nthreads) if nthreads > 1 else None

    def evaluate(stack):
        chunks = [stack[i:i + _CHUNK] for i in range(0, len(stack), _CHUNK)]
        run = pool.map if pool is not None else map
        res = list(run(lambda c: (spectral_radii(c), _stack_norms(N, c)), chunks))
        if not res:
            return np.zeros(0), np.zeros(0)
        return np.concatenate([r[0] for r in res]), np.concatenate([r[1] for r in res])

    mu = float(np.max(_stack_norms(N, mats)))
    lower, best_word = 0.0, ()
    upper = np.inf
    level_uppers = []
    frontier = mats
    words = np.arange(k, dtype=np.int32)[:, None]
    evaluated = pruned = 0
    reached = 0
    partial = False
    try:
        for t in range(1, depth + 1):
            if t > 1:
                n_next = k * len(frontier)
                if evaluated + n_next > budget:
                    partial = True
                    break
                frontier = bmm(mats[:, None], frontier[None]).reshape(-1, M.dim, M.dim)
                words = np.concatenate([np.repeat(np.arange(k, dtype=np.int32), len(words))[:, None],
                                        np.tile(words, (k, 1))], axis=1)
            elif k > budget:
                partial = True
                break
            if len(frontier) == 0:
                # everything pruned: later levels cannot change either bound
                reached = depth
                break
            rho, nrm = evaluate(frontier)
            evaluated += len(frontier)
            ratios = rho ** (1.0 / t)
            i = _best_index(ratios, words)
            if ratios[i] > lower or (ratios[i] == lower and tuple(words[i]) < best_word):
                lower, best_word = float(ratios[i]), tuple(int(w) for w in words[i])
            u = float(np.max(nrm)) ** (1.0 / t)
            level_uppers.append(u)
            upper = min(upper, u)
            reached = t
            if t < depth and prune:
                rest = np.arange(1, depth - t + 1)
                reach = np.max((nrm[:, None] * mu ** rest[None, :]) ** (1.0 / (t + rest[None, :])), axis=1)
                keep = reach >= lower - PRUNE_SLACK
                pruned += int(np.count_nonzero(~keep))
                frontier, words = frontier[keep], words[keep]
    finally:
        if pool is not None:
            pool.shutdown()
    if reached == 0:
        upper = mu
    return JsrBounds(lower=lower, upper=float(upper), depth=reached, pruned=pruned, evaluated=evaluated,
                     partial=partial, best_word=best_word, level_uppers=tuple(level_uppers))


@dataclass(frozen=True)
class DiagonalEstimate:
    value: float
    depth: int
    partial: bool = False

    def __float__(self) -> float:
        return self.value


def diagonal_jsr_estimate(M: MatrixSet, depth: int, budget: int = DEFAULT_BUDGET) -> DiagonalEstimate:
    """``max_{t <= depth} max_{S in S_t} max_i |S_ii|^{1/t}``.

    In coordinates whose standard basis is an Auerbach basis of an extremal
    norm this is a lower bound for rho(M) that converges to it; in arbitrary
    coordinates it can exceed rho(M).
    """
    if depth < 1:
        raise InvalidInputError("depth must be >= 1")
    mats = M.matrices
    k = len(mats)
    best = 0.0
    frontier = mats
    evaluated = 0
    for t in range(1, depth + 1):
        if t > 1:
            if evaluated + k * len(frontier) > budget:
                return DiagonalEstimate(best, t - 1, True)
            frontier = bmm(mats[:, None], frontier[None]).reshape(-1, M.dim, M.dim)
        evaluated += len(frontier)
        diag = np.abs(np.diagonal(frontier, axis1=1, axis2=2))
        best = max(best, float(np.max(diag)) ** (1.0 / t))
    return DiagonalEstimate(best, depth, False)


# -- irreducibility ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class IrreducibilityResult:
    status: str  # "irreducible" | "reducible" | "unknown"
    witness: np.ndarray | None = None  # orthonormal columns spanning a common invariant subspace

    @property
    def irreducible(self) -> bool | None:
        return {"irreducible": True, "reducible": False}.get(self.status)


def _orth(X: np.ndarray, tol: float) -> np.ndarray:
    if X.size == 0:
        return X
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    r = int(np.sum(s > tol * max(1.0, s[0] if len(s) else 1.0)))
    return U[:, :r]


def invariant_closure(mats: np.ndarray, X: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis of the smallest subspace containing ``span(X)`` and invariant under ``mats``."""
    B = _orth(X, tol)
    while True:
        grown = _orth(np.hstack([B] + [A @ B for A in mats]), tol)
        if grown.shape[1] == B.shape[1]:
            return B
        B = grown


def is_invariant(mats: np.ndarray, B: np.ndarray, tol: float = 1e-9) -> bool:
    P = B @ B.T
    scale = max(1.0, float(np.max(np.abs(mats))))
    return all(np.max(np.abs(A @ B - P @ (A @ B))) <= tol * scale for A in mats)


def check_irreducibility(M: MatrixSet, seed: int = 0, attempts: int = 20, tol: float = 1e-9) -> IrreducibilityResult:
    """Search for a common invariant subspace of dimension ``1..d-1``.

    A minimal nonzero invariant subspace ``W`` is invariant under every
    element ``X`` of the algebra generated by ``M``; if ``X`` has pairwise
    distinct eigenvalues, ``W`` contains one of its eigenvectors (or the real
    2-plane of a complex pair).  So the invariant closures of those finitely
    many pieces decide irreducibility.  ``X`` is a random combination of
    members and short products; if no sample has a simple spectrum the
    answer is ``"unknown"``.
    """
    d = M.dim
    mats = M.matrices
    if d == 1:
        return IrreducibilityResult("irreducible")
    if d > 4:
        raise InvalidInputError("check_irreducibility is limited to d <= 4")
    rng = np.random.default_rng(seed)
    words = [w for t in (1, 2) for w in itertools.product(range(len(mats)), repeat=t)][:64]
    gens = np.array([word_product(M, w) for w in words])
    scale = max(1.0, float(np.max(np.abs(mats))))

    # eigenvectors of the members themselves come first: cheap witnesses
    candidates: list[np.ndarray] = []
    for A in mats:
        candidates.extend(_eigen_pieces(A))
    for B in _dedupe_subspaces([invariant_closure(mats, X, tol) for X in candidates], d):
        if 0 < B.shape[1] < d and is_invariant(mats, B, tol):
            return IrreducibilityResult("reducible", B)

    for _ in range(attempts):
        X = np.tensordot(rng.standard_normal(len(gens)), gens, axes=1)
        ev = np.linalg.eigvals(X)
        gaps = np.abs(ev[:, None] - ev[None, :])
        if np.min(gaps[~np.eye(d, dtype=bool)]) <= 1e-6 * scale * max(1.0, float(np.max(np.abs(ev)))):
            continue
        for piece in _eigen_pieces(X):
            B = invariant_closure(mats, piece, tol)
            if B.shape[1] < d:
                if is_invariant(mats, B, tol):
                    return IrreducibilityResult("reducible", B)
        return IrreducibilityResult("irreducible")
    return IrreducibilityResult("unknown")


def _eigen_pieces(A: np.ndarray) -> list[np.ndarray]:
    """Real eigenvectors and real 2-planes of complex eigenpairs, as column blocks."""
    ev, vecs = np.linalg.eig(A)
    out = []
    for lam, v in zip(ev, vecs.T):
        if abs(lam.imag) <= 1e-12 * max(1.0, abs(lam)):
            out.append(np.real(v)[:, None])
        elif lam.imag > 0:
            out.append(np.column_stack([v.real, v.imag]))
    return out


def _dedupe_subspaces(bases: list[np.ndarray], d: int) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for B in bases:
        if any(B.shape == C.shape and np.allclose(B @ B.T, C @ C.T, atol=1e-9) for C in out):
            continue
        out.append(B)
    return out
