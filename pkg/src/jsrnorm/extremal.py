"""Extremal polytopal norms grown from a spectrum-maximizing-product candidate."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError, ReducibilitySuspectedError, UnsupportedCandidateError
from .matset import MatrixSet, operator_norm, spectral_radius, word_product
from .polytope import PolytopalNorm, SymmetricPolytope, hull_from_points

ADMIT_TOL = 1e-9
DEFAULT_MAX_POINTS = 200


def example_pair() -> MatrixSet:
    """The 2x2 pair with JSR ``(48 + 16 sqrt 5)^{1/5}`` attained by ``A1 A2 A1^2 A2``."""
    A1 = np.array([[6.0, -4.0], [7.0, -4.0]])
    A2 = np.array([[-4.0, 4.0], [-5.0, 4.0]])
    return MatrixSet([A1, A2])


EXAMPLE_SMP_WORD = (0, 1, 0, 0, 1)
EXAMPLE_RHO = (48 + 16 * np.sqrt(5)) ** 0.2


@dataclass(frozen=True)
class SmpCandidate:
    word: tuple
    ratio: float

    def __post_init__(self):
        if not self.ratio > 0:
            raise InvalidInputError("SMP candidate must have positive ratio")

    @classmethod
    def from_word(cls, M: MatrixSet, word: Sequence[int]) -> "SmpCandidate":
        word = tuple(int(w) for w in word)
        rho = spectral_radius(word_product(M, word))
        return cls(word, rho ** (1.0 / len(word)))


@dataclass(frozen=True, eq=False)
class InvariantPolytopeResult:
    ball: SymmetricPolytope | None
    certified: bool
    iterations: int
    added_points: int
    ratio: float
    seed: np.ndarray

    @property
    def norm(self) -> PolytopalNorm:
        return PolytopalNorm(self.ball)


def leading_eigenvector(P: np.ndarray, rel_tol: float = 1e-9) -> tuple[float, np.ndarray]:
    """Real, simple, strictly dominant eigenpair; first nonzero coordinate scaled to 1."""
    ev, vecs = np.linalg.eig(P)
    mod = np.abs(ev)
    top = np.max(mod)
    if top == 0:
        raise UnsupportedCandidateError("SMP product is nilpotent")
    lead = np.nonzero(mod >= top * (1 - rel_tol))[0]
    if any(abs(ev[i].imag) > rel_tol * top for i in lead):
        raise UnsupportedCandidateError("leading eigenvalue is complex")
    if len(lead) > 1:
        vals = np.real(ev[lead])
        if np.all(np.abs(vals - vals[0]) <= rel_tol * top):
            raise ReducibilitySuspectedError("leading eigenvalue is not simple")
        raise UnsupportedCandidateError("leading eigenvalue is not unique in modulus")
    i = int(lead[0])
    v = np.real(vecs[:, i])
    nz = np.nonzero(np.abs(v) > 1e-12 * np.max(np.abs(v)))[0][0]
    return float(np.real(ev[i])), v / v[nz]


class _GrowingHull:
    """Symmetric hull of admitted points, valid also while they span a proper subspace."""

    def __init__(self, d: int):
        self.d = d
        self.points: list[np.ndarray] = []
        self.ball: SymmetricPolytope | None = None

    @property
    def rank(self) -> int:
        if not self.points:
            return 0
        P = np.array(self.points)
        return int(np.linalg.matrix_rank(P, tol=1e-10 * max(1.0, np.max(np.abs(P)))))

    def escapes(self, q: np.ndarray) -> bool:
        if self.ball is not None:
            return PolytopalNorm(self.ball).norm(q) > 1 + ADMIT_TOL
        P = np.array(self.points)
        r = self.rank
        if np.linalg.matrix_rank(np.vstack([P, q]), tol=1e-10 * max(1.0, np.max(np.abs(P)))) > r:
            return True
        # q lies in span(P): measure it in orthonormal subspace coordinates
        U = np.linalg.svd(P.T, full_matrices=False)[0][:, :r]
        Pc, qc = P @ U, q @ U
        if r == 1:
            return abs(qc[0]) > np.max(np.abs(Pc[:, 0])) * (1 + ADMIT_TOL)
        return PolytopalNorm(hull_from_points(Pc)).norm(qc) > 1 + ADMIT_TOL

    def add(self, q: np.ndarray) -> None:
        self.points.append(q)
        if self.rank == self.d:
            self.ball = hull_from_points(np.array(self.points if self.ball is None
                                                  else list(self.ball.vertex_reps) + [q]))


def _bfs_relabel(ball: SymmetricPolytope, scaled: np.ndarray, seed: np.ndarray) -> SymmetricPolytope:
    """Order and sign vertex reps by breadth-first images of the seed.

    Starting from the seed, each labelled vertex is mapped by the scaled
    members in order; an image that coincides with ``±`` an unlabelled vertex
    labels it with the image's sign.  Unreached vertices keep their order.
    """
    V = ball.vertex_reps
    tol = 1e-8 * max(1.0, float(np.max(np.abs(V))))

    def match(x):
        for j, v in enumerate(V):
            if np.max(np.abs(x - v)) <= tol or np.max(np.abs(x + v)) <= tol:
                return j
        return None

    order, vecs = [], []
    j0 = match(seed)
    if j0 is None:
        return ball
    order.append(j0)
    vecs.append(seed)
    head = 0
    while head < len(vecs):
        p = vecs[head]
        head += 1
        for A in scaled:
            q = A @ p
            j = match(q)
            if j is not None and j not in order:
                order.append(j)
                vecs.append(q)
    for j in range(len(V)):
        if j not in order:
            order.append(j)
            vecs.append(V[j])
    return SymmetricPolytope(np.array(vecs), ball.facet_reps)


def grow_polytope(scaled: np.ndarray, seeds: Sequence[np.ndarray], max_points: int = DEFAULT_MAX_POINTS,
                  max_rank_sweeps: int | None = None) -> tuple[_GrowingHull, int, bool]:
    """Admit escaping images generation by generation.

    Returns the hull, the number of sweeps and whether growth stopped by
    itself (as opposed to hitting ``max_points``).
    """
    d = scaled.shape[1]
    hull = _GrowingHull(d)
    frontier = []
    for s in seeds:
        if not hull.points or hull.escapes(s):
            hull.add(s)
            frontier.append(s)
    iterations = 0
    while frontier:
        iterations += 1
        if max_rank_sweeps is not None and hull.ball is None and iterations > max_rank_sweeps:
            raise ReducibilitySuspectedError(
                f"orbit still spans only {hull.rank} dimensions after {max_rank_sweeps} sweeps")
        new = []
        for p in frontier:
            for A in scaled:
                q = A @ p
                if hull.escapes(q):
                    hull.add(q)
                    new.append(q)
                    if len(hull.points) > max_points:
                        return hull, iterations, False
        frontier = new
    return hull, iterations, True


def build_invariant_polytope(M: MatrixSet, smp: SmpCandidate, max_points: int = DEFAULT_MAX_POINTS) -> InvariantPolytopeResult:
    """Grow ``conv(±orbit(v1))`` under ``M / ratio`` until no image escapes.

    ``v1`` is the leading eigenvector of the scaled SMP product.  Images are
    taken generation by generation; an image is admitted when its norm with
    respect to the current hull exceeds ``1 + 1e-9``.  The result is
    certified when a generation admits nothing; it is returned uncertified
    when more than ``max_points`` points were admitted.
    """
    d = M.dim
    scaled = M.matrices / smp.ratio
    _, v1 = leading_eigenvector(word_product(M, smp.word))
    hull, iterations, closed = grow_polytope(scaled, [v1], max_points, max_rank_sweeps=2 * d)
    if hull.ball is None:
        raise ReducibilitySuspectedError(f"orbit of the leading eigenvector spans only {hull.rank} dimensions")
    if not closed:
        return InvariantPolytopeResult(hull.ball, False, iterations, len(hull.points), smp.ratio, v1)
    ball = _bfs_relabel(hull.ball, scaled, v1)
    N = PolytopalNorm(ball)
    certified = all(operator_norm(A, N) <= 1 + ADMIT_TOL for A in scaled)
    return InvariantPolytopeResult(ball, certified, iterations, len(hull.points), smp.ratio, v1)


def verify_extremal(M: MatrixSet, N, rho: float) -> bool:
    """True iff every member has operator norm at most ``rho (1 + 1e-9)``."""
    if not rho > 0:
        raise InvalidInputError("rho must be positive")
    return max(operator_norm(A, N) for A in M) <= rho * (1 + ADMIT_TOL)
