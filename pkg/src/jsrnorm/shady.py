"""Shady norms: the icosahedral catalog, face-to-vertex maps, shadiness search and witnesses.

A norm is shady when every projection of intermediate rank has operator norm
bounded away from 1.  For such a polytopal norm the rank-one maps sending a
facet onto a vertex form a finite set of JSR 1 whose principal submatrices
stay large under every similarity; :func:`submatrix_witness` exhibits this
for a given similarity with a checked eigen-equation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    CorruptedCatalogError,
    InvalidInputError,
    NumericalFailureError,
    UnsupportedDimensionError,
)
from .lp import minimax_affine
from .matset import MatrixSet
from .polytope import PolytopalNorm, SymmetricPolytope, facet_of_point

NORM_TOL = 1e-9

# -- icosahedron catalog ----------------------------------------------------

_A, _B, _C = Fraction(-3, 5), Fraction(-1, 5), Fraction(1, 10)
ICOSA_VERTICES = (
    (Fraction(1), _A, _C),
    (Fraction(1), _B, _C),
    (_A, _C, Fraction(1)),
    (_B, _C, Fraction(1)),
    (_C, Fraction(1), _A),
    (_C, Fraction(1), _B),
)
ICOSA_FACET_SEEDS = (
    (Fraction(20, 53), Fraction(-55, 53), Fraction(0)),
    (Fraction(20, 17), Fraction(15, 17), Fraction(0)),
    (Fraction(10, 9), Fraction(10, 9), Fraction(10, 9)),
    (Fraction(390, 1069), Fraction(-1250, 1069), Fraction(-710, 1069)),
)
ICOSA_SYMMETRY = ((0, 0, -1), (-1, 0, 0), (0, -1, 0))
ICOSA_ORBIT_SIZES = (6, 6, 2, 6)


def _apply(A, v):
    return tuple(sum(a * x for a, x in zip(row, v)) for row in A)


def _transpose(A):
    return tuple(zip(*A))


def _orbit(A, v) -> list:
    out = [tuple(v)]
    while True:
        nxt = _apply(A, out[-1])
        if nxt == out[0]:
            return out
        out.append(nxt)
        if len(out) > 64:
            raise CorruptedCatalogError("symmetry orbit does not close")


def _neg(v):
    return tuple(-x for x in v)


@dataclass(frozen=True)
class IcosahedronCatalog:
    """Exact rational description of the icosahedral ball."""

    vertices: tuple  # all 12 vertices
    facets: tuple  # all 20 scaled normals
    orbits: tuple  # facet orbits under the symmetry, one tuple per seed
    incidence: tuple  # incidence[i] = indices of vertices on facet i


def icosahedron_catalog() -> IcosahedronCatalog:
    """Build and validate the rational catalog; every check is exact."""
    S = ICOSA_SYMMETRY
    verts = list(ICOSA_VERTICES) + [_neg(v) for v in ICOSA_VERTICES]
    vset = set(verts)
    if len(vset) != 12:
        raise CorruptedCatalogError("expected 12 distinct vertices")
    if {_apply(S, v) for v in verts} != vset:
        raise CorruptedCatalogError("vertex set is not invariant under the symmetry")
    # Normals transform contragrediently; S is a signed permutation, so S^{-T} = S.
    St = _transpose(S)
    if {tuple(_apply(St, _apply(S, e))) for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1))} != {(1, 0, 0), (0, 1, 0), (0, 0, 1)}:
        raise CorruptedCatalogError("symmetry is not orthogonal")
    orbits = tuple(tuple(_orbit(S, w)) for w in ICOSA_FACET_SEEDS)
    if tuple(len(o) for o in orbits) != ICOSA_ORBIT_SIZES:
        raise CorruptedCatalogError(f"facet orbit sizes {[len(o) for o in orbits]} differ from {ICOSA_ORBIT_SIZES}")
    facets = tuple(w for o in orbits for w in o)
    if len(set(facets)) != 20:
        raise CorruptedCatalogError("facet orbits overlap")
    incidence = []
    for w in facets:
        vals = [sum(a * b for a, b in zip(w, v)) for v in verts]
        if any(abs(x) > 1 for x in vals):
            raise CorruptedCatalogError(f"facet {w} cuts off a vertex")
        on = tuple(j for j, x in enumerate(vals) if x == 1)
        if len(on) != 3:
            raise CorruptedCatalogError(f"facet {w} touches {len(on)} vertices, expected 3")
        incidence.append(on)
    return IcosahedronCatalog(tuple(verts), facets, orbits, tuple(incidence))


def icosahedron_ball() -> SymmetricPolytope:
    cat = icosahedron_catalog()
    V = np.array([[float(x) for x in v] for v in ICOSA_VERTICES])
    reps, seen = [], set()
    for w in cat.facets:
        if _neg(w) not in seen:
            seen.add(w)
            reps.append([float(x) for x in w])
    return SymmetricPolytope(V, np.array(reps))


def icosahedron_norm() -> PolytopalNorm:
    return PolytopalNorm(icosahedron_ball())


# -- rank-one maps and tailored sets ----------------------------------------

@dataclass(frozen=True, eq=False)
class RankOneMap:
    v: np.ndarray
    phi: np.ndarray
    matrix: np.ndarray


def face_to_vertex_map(N: PolytopalNorm, facet: int, vertex: int) -> RankOneMap:
    """``A = v phi^T`` sending the facet (index into ``ball.facets``) onto the vertex (index into ``ball.vertices``)."""
    F, V = N.ball.facets, N.ball.vertices
    if not (0 <= facet < len(F) and 0 <= vertex < len(V)):
        raise InvalidInputError(f"facet {facet} / vertex {vertex} out of range")
    phi, v = F[facet].copy(), V[vertex].copy()
    if np.max(np.abs(N.ball.vertex_reps @ phi)) > 1 + NORM_TOL:
        raise NumericalFailureError("facet functional exceeds 1 on the ball")
    return RankOneMap(v, phi, np.outer(v, phi))


def tailored_matrix_set(N: PolytopalNorm) -> MatrixSet:
    """All facet-to-vertex maps ``v phi^T``; ``(-v)(-phi)^T`` coincides, so vertex reps suffice."""
    V, F = N.ball.vertex_reps, N.ball.facets
    return MatrixSet([np.outer(v, f) for v in V for f in F])


def icosahedron_generated_set() -> MatrixSet:
    """The same set generated as ``S^k v w^T S^l`` for ``k, l`` in 0..5 from the seeds."""
    S = np.array(ICOSA_SYMMETRY, dtype=float)
    V = np.array([[float(x) for x in v] for v in ICOSA_VERTICES])
    W = np.array([[float(x) for x in w] for w in ICOSA_FACET_SEEDS])
    P = [np.linalg.matrix_power(S, k) for k in range(6)]
    return MatrixSet([P[k] @ np.outer(v, w) @ P[l] for k in range(6) for l in range(6) for v in V for w in W],
                     dedup_tol=1e-12)


# -- shadiness ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ShadinessEstimate:
    value: float
    rank: int
    argmin: np.ndarray
    grid_level: int
    refined: bool
    evaluations: int = 0


def hemisphere_grid(level: int) -> np.ndarray:
    """Octahedral geodesic grid on the upper hemisphere (one of each ``±`` pair).

    Points are ``(i, j, k)/n`` on the octahedron faces with ``n = 2^level``,
    normalized.  Each level contains the previous one and the coordinate axes.
    """
    if level < 0:
        raise InvalidInputError("grid level must be nonnegative")
    n = 2 ** level
    pts = set()
    for i in range(-n, n + 1):
        for j in range(-(n - abs(i)), n - abs(i) + 1):
            k = n - abs(i) - abs(j)
            p = (i, j, k)
            # keep one representative per antipodal pair
            if k > 0 or (k == 0 and (j > 0 or (j == 0 and i > 0))):
                pts.add(p)
    P = np.array(sorted(pts), dtype=float)
    return P / np.linalg.norm(P, axis=1, keepdims=True)


def _plane_basis(phi: np.ndarray) -> np.ndarray:
    """Two orthonormal vectors spanning ``phi^⊥`` (deterministic)."""
    Q, _ = np.linalg.qr(np.column_stack([phi, np.eye(3)]))
    return Q[:, 1:3]


def projection_norm_for_plane(N: PolytopalNorm, phi: np.ndarray) -> tuple[float, np.ndarray]:
    """Least operator norm of a projection with image ``phi^⊥``.

    With kernel direction ``w`` (``phi·w = 1``), ``P = I - w phi^T`` is affine
    in ``w``, so the minimax over vertex/facet pairs is a linear program.
    """
    F, V = N.ball.facet_reps, N.ball.vertex_reps
    phi = phi / np.linalg.norm(phi)
    B = _plane_basis(phi)
    w0 = phi
    FV = F @ V.T  # <n_i, u>
    Fw0 = F @ w0
    pu = V @ phi
    # <n_i, P u> = FV - (Fw0 + (F B) y) * pu
    G = -(np.einsum("ip,j->ijp", F @ B, pu)).reshape(-1, 2)
    h = (FV - np.outer(Fw0, pu)).reshape(-1)
    res = minimax_affine(G, h)
    y = res.x[:2]
    w = w0 + B @ y
    P = np.eye(3) - np.outer(w, phi)
    return float(np.max(np.abs(F @ P @ V.T))), P


def shadiness_estimate(N: PolytopalNorm, rank: int = 2, grid_level: int = 4, refine: int = 3) -> ShadinessEstimate:
    """Heuristic minimum of ``||P||`` over rank-2 projections in dimension 3.

    Every value returned is the norm of an explicit projection, hence an upper
    bound on the true minimum; the search itself is not exhaustive.
    """
    if N.dim != 3 or rank != 2:
        raise UnsupportedDimensionError("shadiness search is implemented for d = 3, rank 2")
    grid = hemisphere_grid(grid_level)
    best_val, best_P, best_phi = np.inf, None, None
    evals = 0
    for phi in grid:
        val, P = projection_norm_for_plane(N, phi)
        evals += 1
        if val < best_val - 1e-15:
            best_val, best_P, best_phi = val, P, phi
    step = (np.pi / 2) / 2 ** grid_level
    offsets = np.linspace(-1.0, 1.0, 11)
    for _ in range(refine):
        B = _plane_basis(best_phi)
        center = best_phi
        for a in offsets:
            for b in offsets:
                phi = center + step * (a * B[:, 0] + b * B[:, 1])
                phi = phi / np.linalg.norm(phi)
                val, P = projection_norm_for_plane(N, phi)
                evals += 1
                if val < best_val - 1e-15:
                    best_val, best_P, best_phi = val, P, phi
        step /= 10
    return ShadinessEstimate(float(best_val), rank, best_P, grid_level, refine > 0, evals)


# -- submatrix witnesses -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class Witness:
    T: np.ndarray
    J: tuple
    alpha: float
    map: RankOneMap
    z: np.ndarray
    residual: float
    member_index: int


def _in_set(Mset: MatrixSet, A: np.ndarray, tol: float = 1e-9) -> int:
    diffs = np.max(np.abs(Mset.matrices - A), axis=(1, 2))
    i = int(np.argmin(diffs))
    return i if diffs[i] <= tol * max(1.0, float(np.max(np.abs(A)))) else -1


def submatrix_witness(Mset: MatrixSet, N: PolytopalNorm, T, J: Sequence[int]) -> Witness:
    """Member whose ``(T^{-1} A T)_{J,J}`` has eigenvalue ``alpha = max_v ||Q v||``.

    ``Q`` is the projection onto the span of the columns of ``T`` indexed by
    ``J`` along the remaining columns; ``J`` is 0-based.
    """
    T = np.asarray(T, dtype=float)
    d = N.dim
    J = tuple(int(j) for j in J)
    if T.shape != (d, d):
        raise InvalidInputError(f"T has shape {T.shape}, expected ({d}, {d})")
    if not 2 <= len(J) <= d - 1 or len(set(J)) != len(J) or not all(0 <= j < d for j in J):
        raise InvalidInputError(f"index set {J} must have 2..{d - 1} distinct entries in 0..{d - 1}")
    if np.linalg.matrix_rank(T) < d:
        raise InvalidInputError("T is singular")
    Tinv = np.linalg.inv(T)
    PJ = np.zeros((d, d))
    PJ[J, J] = 1.0
    Q = T @ PJ @ Tinv
    V = N.ball.vertex_reps
    norms = N.norms(V @ Q.T)
    top = float(np.max(norms))
    j = int(np.nonzero(norms >= top * (1 - 1e-12))[0][0])
    v = V[j]
    w = Q @ v
    alpha = float(N.norm(w))
    fidx, phi = facet_of_point(N, w / alpha)
    rmap = face_to_vertex_map(N, fidx, j)
    member = _in_set(Mset, rmap.matrix)
    if member < 0:
        raise InvalidInputError("the witnessing map is not a member of the given set")
    A = Mset.matrices[member]
    TJ = T[:, J]
    z, *_ = np.linalg.lstsq(TJ, w, rcond=None)
    z = z / np.max(np.abs(z))
    sub = (Tinv @ A @ T)[np.ix_(J, J)]
    resid = float(np.max(np.abs(sub @ z - alpha * z)))
    if resid > 1e-8 * alpha:
        raise NumericalFailureError(f"eigen-equation residual {resid:.3g} exceeds 1e-8 * alpha")
    return Witness(T, J, alpha, rmap, z, resid, member)
