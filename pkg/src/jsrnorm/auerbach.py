"""Auerbach bases of polytopal norms and the entry-normalizing similarity.

For a polytopal norm the classical determinant-maximization proof of
Auerbach's theorem is constructive: ``|det(x_1, ..., x_d)|`` is convex in
each argument, so its maximum over ``K^d`` sits at vertices and a finite
search over vertex representatives finds it.  The dual functionals are the
rows of ``X^{-1}``; by Cramer's rule maximality gives ``||y_i||_* <= 1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import (
    DegeneratePolytopeError,
    InvalidInputError,
    JsrError,
    NumericalFailureError,
    ZeroJsrError,
)
from .extremal import (
    DEFAULT_MAX_POINTS,
    SmpCandidate,
    build_invariant_polytope,
    grow_polytope,
)
from .matset import MatrixSet, check_irreducibility, jsr_bounds, operator_norm
from .polytope import PolytopalNorm, SymmetricPolytope

BIORTH_TOL = 1e-9
MAX_SUBSETS = 10**6
MAX_COND = 1e12


@dataclass(frozen=True, eq=False)
class AuerbachBasis:
    x: np.ndarray  # x[i] is the i-th primal vector
    y: np.ndarray  # y[i] is the i-th dual functional
    indices: tuple = ()

    def check(self, N: PolytopalNorm, tol: float = BIORTH_TOL) -> None:
        d = len(self.x)
        if np.max(np.abs(self.x @ self.y.T - np.eye(d))) > tol:
            raise NumericalFailureError("basis is not biorthogonal")
        for xi, yi in zip(self.x, self.y):
            if abs(N.norm(xi) - 1) > tol or abs(N.dual_norm(yi) - 1) > tol:
                raise NumericalFailureError("basis vectors are not normalized")


@dataclass(frozen=True, eq=False)
class SimilarityTransform:
    T: np.ndarray
    T_inv: np.ndarray = None
    cond: float = field(default=float("nan"))

    def __post_init__(self):
        T = np.array(self.T, dtype=float)
        Ti = np.linalg.inv(T) if self.T_inv is None else np.array(self.T_inv, dtype=float)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "T_inv", Ti)
        object.__setattr__(self, "cond", float(np.linalg.cond(T)))

    @classmethod
    def identity(cls, d: int) -> "SimilarityTransform":
        return cls(np.eye(d))

    def apply(self, M: MatrixSet) -> MatrixSet:
        return M.conjugated(self.T, self.T_inv)

    def conj(self, A: np.ndarray) -> np.ndarray:
        return self.T_inv @ A @ self.T

    def then(self, other: "SimilarityTransform") -> "SimilarityTransform":
        """Composite ``T_self @ T_other``: first conjugate by self, then by other."""
        return SimilarityTransform(self.T @ other.T, other.T_inv @ self.T_inv)


def auerbach_basis(N: PolytopalNorm) -> AuerbachBasis:
    V = N.ball.vertex_reps
    n, d = V.shape
    if comb(n, d) > MAX_SUBSETS:
        raise InvalidInputError(f"C({n},{d}) subsets exceed the search limit {MAX_SUBSETS}")
    combos = np.array(list(itertools.combinations(range(n), d)), dtype=int)
    dets = np.abs(np.linalg.det(V[combos]))
    top = float(np.max(dets))
    if top <= 1e-14 * max(1.0, float(np.max(np.abs(V)))) ** d:
        raise DegeneratePolytopeError("every d-subset of vertices is singular")
    # first (lexicographically smallest) subset within rounding of the maximum
    best = combos[np.nonzero(dets >= top * (1 - 1e-12))[0][0]]
    X = V[best]
    Y = np.linalg.inv(X.T)  # rows of inv([x_1 ... x_d]) = rows of inv(X^T)
    return AuerbachBasis(X.copy(), Y, tuple(int(i) for i in best))


def transform_from_basis(B: AuerbachBasis) -> SimilarityTransform:
    T = B.x.T.copy()
    Tr = SimilarityTransform(T, B.y.copy())
    if not np.isfinite(Tr.cond) or Tr.cond > MAX_COND:
        raise NumericalFailureError(f"transform condition number {Tr.cond:.3g} exceeds {MAX_COND:.0e}")
    return Tr


def verify_sandwich(Tr: SimilarityTransform, N: PolytopalNorm, samples: int = 10_000, seed: int = 0,
                    tol: float = 1e-9) -> bool:
    """Check ``||x||_inf <= ||T x|| <= ||x||_1`` on random samples and on every ``±e_i``."""
    d = N.dim
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.standard_normal((samples, d)), np.eye(d), -np.eye(d)])
    nt = N.norms(X @ Tr.T.T)
    linf = np.max(np.abs(X), axis=1)
    l1 = np.sum(np.abs(X), axis=1)
    return bool(np.all(linf <= nt + tol * l1) and np.all(nt <= l1 * (1 + tol)))


# -- entry normalization ----------------------------------------------------

@dataclass
class NormalizationReport:
    path: str
    certified: bool
    rho_lower: float
    rho_upper: float
    max_entry: float = float("nan")
    entry_ratio: float = float("nan")
    entry_bound_ok: bool = False
    epsilons: list = field(default_factory=list)
    smp_word: tuple | None = None
    irreducibility: str = ""
    blocks: list = field(default_factory=list)
    verifications: list = field(default_factory=list)
    ball: SymmetricPolytope | None = None

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "certified": self.certified,
            "rho_lower": self.rho_lower,
            "rho_upper": self.rho_upper,
            "max_entry": self.max_entry,
            "entry_ratio": self.entry_ratio,
            "entry_bound_ok": self.entry_bound_ok,
            "epsilons": list(self.epsilons),
            "smp_word": list(self.smp_word) if self.smp_word is not None else None,
            "irreducibility": self.irreducibility,
            "blocks": list(self.blocks),
            "verifications": list(self.verifications),
        }


@dataclass
class _Block:
    T: np.ndarray
    rho_upper: float
    certified: bool
    path: str
    epsilons: list
    smp_word: tuple | None = None
    irreducibility: str = ""
    ball: SymmetricPolytope | None = None
    blocks: list = field(default_factory=list)


def _orthonormal_completion(W: np.ndarray) -> np.ndarray:
    d, k = W.shape
    Q, _ = np.linalg.qr(np.hstack([W, np.eye(d)]))
    S = Q[:, :d]
    # keep span(W) as the leading block with W's own orientation
    S[:, :k] = W
    return S


def _irreducible_block(M: MatrixSet, depth: int, word, ball, max_points: int, status: str) -> _Block:
    d = M.dim
    b = jsr_bounds(M, depth)
    smp_word = tuple(word) if word is not None else b.best_word
    certified = False
    if ball is None:
        ratio = max(b.lower, 1e-300)
        try:
            res = build_invariant_polytope(M, SmpCandidate.from_word(M, smp_word), max_points)
            ball, certified = res.ball, res.certified
        except JsrError:
            ball = None
        if ball is None:
            hull, _, _ = grow_polytope(M.matrices / ratio, list(np.eye(d)), max_points)
            if hull.ball is None:
                raise NumericalFailureError("could not build any polytopal norm for the block")
            ball = hull.ball
    N = PolytopalNorm(ball)
    norm_bound = max(operator_norm(A, N) for A in M)
    if not certified:
        certified = norm_bound <= b.lower * (1 + 1e-9)
    rho_upper = min(jsr_bounds(M, depth, N).upper, norm_bound)
    if not certified:
        rho_upper = min(rho_upper, b.upper)
    Tr = transform_from_basis(auerbach_basis(N))
    return _Block(Tr.T, rho_upper, certified, "irreducible", [], smp_word, status, ball)


def _normalize_block(M: MatrixSet, depth: int, word, ball, max_points: int, seed: int) -> _Block:
    d = M.dim
    if d == 1:
        return _Block(np.eye(1), float(np.max(np.abs(M.matrices))), True, "scalar", [], None, "irreducible")
    status = "unknown"
    if d <= 4:
        irr = check_irreducibility(M, seed=seed)
        status = irr.status
        if irr.status == "reducible":
            W = irr.witness
            k = W.shape[1]
            S = _orthonormal_completion(W)
            C = MatrixSet([S.T @ A @ S for A in M])  # S orthogonal
            top = _normalize_block(C.principal(range(k)), depth, None, None, max_points, seed)
            bot = _normalize_block(C.principal(range(k, d)), depth, None, None, max_points, seed)
            R = np.zeros((d, d))
            R[:k, :k], R[k:, k:] = top.T, bot.T
            rho_upper = max(top.rho_upper, bot.rho_upper)
            Rinv = np.linalg.inv(R)
            off = max(float(np.max(np.abs((Rinv @ A @ R)[:k, k:]))) for A in C)
            eps = 1.0
            while off * eps > rho_upper and eps > 2.0 ** -60:
                eps *= 0.5
            D = np.diag([1.0] * k + [eps] * (d - k))
            return _Block(S @ R @ D, rho_upper, top.certified and bot.certified, "reducible",
                          [eps] + top.epsilons + bot.epsilons, None, "reducible",
                          blocks=[(top.path, k), (bot.path, d - k)])
    return _irreducible_block(M, depth, word, ball, max_points, status)


def normalize_entries(M: MatrixSet, depth: int, word=None, ball: SymmetricPolytope | None = None,
                      max_points: int = DEFAULT_MAX_POINTS, seed: int = 0):
    """Similarity ``T`` with every entry of ``T^{-1} M T`` bounded by the JSR.

    Irreducible sets: extremal polytope from an SMP candidate (``word``, or
    the best word found by :func:`jsr_bounds` at ``depth``), then its
    Auerbach transform.  Reducible sets: block-triangularize along a common
    invariant subspace, recurse on the diagonal blocks and shrink the
    off-diagonal block by the largest power of 1/2 that suffices.

    Returns ``(SimilarityTransform, transformed MatrixSet, NormalizationReport)``.
    """
    b = jsr_bounds(M, depth)
    if b.lower <= 0:
        raise ZeroJsrError(f"JSR lower bound at depth {depth} is 0; entry normalization needs rho(M) > 0")
    blk = _normalize_block(M, depth, word, ball, max_points, seed)
    Tr = SimilarityTransform(blk.T)
    if not np.isfinite(Tr.cond) or Tr.cond > MAX_COND:
        raise NumericalFailureError(f"normalizing transform is ill-conditioned (cond {Tr.cond:.3g})")
    out = Tr.apply(M)
    max_entry = float(np.max(np.abs(out.matrices)))
    rho_upper = blk.rho_upper
    report = NormalizationReport(
        path=blk.path,
        certified=blk.certified,
        rho_lower=b.lower,
        rho_upper=rho_upper,
        max_entry=max_entry,
        entry_ratio=max_entry / rho_upper,
        entry_bound_ok=max_entry <= rho_upper * (1 + 1e-9),
        epsilons=blk.epsilons,
        smp_word=blk.smp_word,
        irreducibility=blk.irreducibility,
        blocks=blk.blocks,
        ball=blk.ball,
    )
    if blk.certified:
        report.verifications.append("extremal: vertex-mapping check")
    report.verifications.append("entries: direct max-abs evaluation against rho_upper")
    return Tr, out, report
