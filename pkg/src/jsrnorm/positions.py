"""Upper bounds for principal submatrices via good positions of the unit ball.

Two positions are used.  In John's position the Euclidean ball is the largest
inscribed ellipsoid, which sandwiches the body between ``B_2`` and
``sqrt(d) B_2`` and bounds every coordinate projection by ``sqrt(d)``.  For a
single index set a projection of least norm with coordinate image gives the
sharper constant ``delta(m)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import sqrt
from typing import Sequence

import numpy as np

from .auerbach import SimilarityTransform
from .errors import CertificationError, InvalidInputError, JsrError, NumericalFailureError
from .extremal import DEFAULT_MAX_POINTS, SmpCandidate, build_invariant_polytope, grow_polytope
from .lp import minimax_affine
from .matset import MatrixSet, jsr_bounds
from .polytope import PolytopalNorm, SymmetricPolytope, from_facets

CONTAIN_TOL = 1e-9
SUBMATRIX_BUDGET = 2 * 10**6


# -- John ellipsoid ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """``{x : x^T Q^{-1} x <= 1}``."""

    Q: np.ndarray

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise InvalidInputError("Q must be square")
        if np.max(np.abs(Q - Q.T)) > 1e-12 * max(1.0, float(np.max(np.abs(Q)))):
            raise InvalidInputError("Q must be symmetric")
        if np.min(np.linalg.eigvalsh(Q)) <= 0:
            raise InvalidInputError("Q must be positive definite")
        object.__setattr__(self, "Q", (Q + Q.T) / 2)

    def sqrt(self) -> np.ndarray:
        w, U = np.linalg.eigh(self.Q)
        return (U * np.sqrt(w)) @ U.T


def _sym_basis(d: int) -> np.ndarray:
    """Basis ``E_k`` of symmetric d x d matrices, shape ``(d(d+1)/2, d, d)``."""
    out = []
    for i in range(d):
        for j in range(i, d):
            E = np.zeros((d, d))
            E[i, j] = E[j, i] = 1.0
            out.append(E)
    return np.array(out)


def john_ellipsoid(N: PolytopalNorm, gap_tol: float = 1e-10, max_iter: int = 500) -> Ellipsoid:
    """Maximal-volume centered ellipsoid inside the unit ball.

    Maximizes ``log det Q`` subject to ``n_i^T Q n_i <= 1`` for the facet
    normals, by a log-barrier method with damped Newton steps on the entries
    of ``Q``.  Steps are cut back until ``Q`` stays positive definite (smallest
    eigenvalue above ``1e-12``) and strictly feasible.
    """
    # The problem is affine-equivariant: with facets F S the optimum is S^-1 Q S^-T.
    # Whitening so that (F S)^T (F S) = I keeps the Newton systems well scaled.
    F = N.ball.facet_reps
    w, U = np.linalg.eigh(F.T @ F)
    S = (U / np.sqrt(w)) @ U.T
    Qw = _john_whitened(F @ S, gap_tol, max_iter)
    return Ellipsoid(S @ Qw @ S)


def _john_whitened(F: np.ndarray, gap_tol: float, max_iter: int) -> np.ndarray:
    d = F.shape[1]
    m = len(F)
    E = _sym_basis(d)
    # a[i, k] = n_i^T E_k n_i, so that n_i^T Q n_i = a[i] @ q
    a = np.einsum("id,kde,ie->ik", F, E, F)
    # start strictly inside: eps I with eps half the largest feasible multiple
    eps = 0.5 / float(np.max(np.sum(F * F, axis=1)))
    q = eps * np.eye(d)[np.triu_indices(d)]

    def phi(q, t):
        Qm = _from_vec(q, d)
        slack = 1.0 - a @ q
        if np.any(slack <= 0):
            return np.inf
        w = np.linalg.eigvalsh(Qm)
        if w[0] <= 1e-12:
            return np.inf
        return -t * float(np.sum(np.log(w))) - float(np.sum(np.log(slack)))

    t = 1.0
    it = 0
    while True:
        # centering
        for _ in range(100):
            it += 1
            if it > max_iter:
                raise NumericalFailureError("John ellipsoid solver did not converge")
            Qm = _from_vec(q, d)
            Qi = np.linalg.inv(Qm)
            slack = 1.0 - a @ q
            QiE = np.einsum("de,kef->kdf", Qi, E)
            grad = -t * np.einsum("kdd->k", QiE) + a.T @ (1.0 / slack)
            H = t * np.einsum("kde,led->kl", QiE, QiE) + (a / slack[:, None] ** 2).T @ a
            step = -np.linalg.solve(H, grad)
            dec = float(-grad @ step)
            # the decrement is in barrier units; divided by t it bounds the
            # log det suboptimality, so 1e-7 is far below the final gap m/t
            if dec / 2 <= 1e-7:
                break
            s, f0 = 1.0, phi(q, t)
            while phi(q + s * step, t) > f0 + 0.25 * s * grad @ step:
                s *= 0.5
                if s < 1e-20:
                    break
            q_new = q + s * step
            if s < 1e-20 or np.array_equal(q_new, q):
                break  # no descent at working precision
            q = q_new
        if m / t < gap_tol:
            break
        t *= 10.0
    return _from_vec(q, d)


def _from_vec(q: np.ndarray, d: int) -> np.ndarray:
    Q = np.zeros((d, d))
    iu = np.triu_indices(d)
    Q[iu] = q
    Q[(iu[1], iu[0])] = q
    return Q


@dataclass
class ContainmentReport:
    inner_max: float  # max_i ||T n_i||_2, must be <= 1
    outer_max: float  # max_v ||T^{-1} v||_2, must be <= sqrt(d)
    sqrt_d: float
    verification: str = "john: facet/vertex containment check"


def john_transform(N: PolytopalNorm) -> tuple[SimilarityTransform, ContainmentReport]:
    """``T = Q^{1/2}`` with ``B_2 ⊆ T^{-1} K ⊆ sqrt(d) B_2`` re-verified on facets and vertices."""
    E = john_ellipsoid(N)
    T = E.sqrt()
    Tr = SimilarityTransform(T)
    inner = float(np.max(np.linalg.norm(N.ball.facet_reps @ T, axis=1)))
    outer = float(np.max(np.linalg.norm(N.ball.vertex_reps @ Tr.T_inv.T, axis=1)))
    rep = ContainmentReport(inner, outer, sqrt(N.dim))
    if inner > 1 + CONTAIN_TOL:
        raise CertificationError(f"inscribed ball pokes out of a facet ({inner!r} > 1)")
    if outer > sqrt(N.dim) + CONTAIN_TOL:
        raise CertificationError(f"a vertex lies outside sqrt(d) B_2 ({outer!r})")
    return Tr, rep


# -- submatrix bounds ----------------------------------------------------------

@dataclass
class SubmatrixBoundReport:
    J: tuple
    rho_sub_upper: float
    bound: float
    satisfied: bool
    depth: int
    bound_name: str = ""
    partial: bool = False
    certified: bool = True
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"J": list(self.J), "rho_sub_upper": self.rho_sub_upper, "bound": self.bound,
                "satisfied": self.satisfied, "depth": self.depth, "bound_name": self.bound_name,
                "partial": self.partial, "certified": self.certified, **self.extra}


class _ScalarNorm:
    """Norm ``c |z|`` on R^1."""

    def __init__(self, c: float):
        self.c = c
        self.dim = 1

    def norm(self, x) -> float:
        return self.c * abs(float(np.asarray(x).reshape(-1)[0]))

    def operator_norm(self, A) -> float:
        return abs(float(np.asarray(A).reshape(-1)[0]))

    def operator_norms(self, stack: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(stack).reshape(len(stack)))


def section_norm(N: PolytopalNorm, S: np.ndarray):
    """Norm ``z -> ||S z||`` on R^m for an injective ``d x m`` matrix ``S``."""
    normals = N.ball.facet_reps @ S
    if S.shape[1] == 1:
        return _ScalarNorm(float(np.max(np.abs(normals))))
    return PolytopalNorm(from_facets(normals))


def _extremal_ball(M: MatrixSet, depth: int, ball, max_points: int):
    if ball is not None:
        return ball, None
    b = jsr_bounds(M, depth)
    try:
        res = build_invariant_polytope(M, SmpCandidate.from_word(M, b.best_word), max_points)
        if res.certified:
            return res.ball, None
        issue = "invariant polytope not certified"
    except JsrError as exc:
        issue = str(exc)
    if b.lower <= 0:
        return None, issue
    hull, _, _ = grow_polytope(M.matrices / b.lower, list(np.eye(M.dim)), max_points)
    return hull.ball, issue


def verify_all_submatrices_bound(M: MatrixSet, depth: int, ball: SymmetricPolytope | None = None,
                                 budget: int = SUBMATRIX_BUDGET, max_points: int = DEFAULT_MAX_POINTS):
    """Check ``rho((T^{-1} M T)_{J,J}) <= sqrt(d) rho`` for every nonempty ``J``, T from John's position.

    Each submatrix JSR is bounded from above by :func:`jsr_bounds` in the norm
    ``z -> ||T I_J z||``; products beyond ``budget`` are skipped, in which case
    the report carries the depth actually completed and ``partial=True``.
    Returns ``(transform, rho_upper, reports)``.
    """
    d = M.dim
    K, issue = _extremal_ball(M, depth, ball, max_points)
    if K is None:
        raise CertificationError(f"no extremal polytope available: {issue}")
    N = PolytopalNorm(K)
    rho = jsr_bounds(M, 1, N).upper
    certified = issue is None
    Tr, _ = john_transform(N)
    Mt = Tr.apply(M)
    out = []
    for m in range(1, d + 1):
        for J in itertools.combinations(range(d), m):
            sub = Mt.principal(J)
            NJ = section_norm(N, Tr.T[:, J])
            b = jsr_bounds(sub, depth, NJ, budget=budget)
            bound = sqrt(d) * rho
            out.append(SubmatrixBoundReport(J, b.upper, bound, b.upper <= bound * (1 + 1e-9), b.depth,
                                            "sqrt(d)*rho", b.partial, certified,
                                            {"rho_sub_lower": b.lower}))
    return Tr, rho, out


def delta(m: int, field: str = "real") -> float:
    """Upper bound on the least norm of a projection onto an m-dimensional subspace."""
    if int(m) != m or m < 1:
        raise InvalidInputError("m must be a positive integer")
    if field == "real":
        return 2.0 / (m + 1) * (1 + (m - 1) / 2 * sqrt(m + 2))
    if field == "complex":
        return (1 + (m - 1) * sqrt(m + 1)) / m
    raise InvalidInputError("field must be 'real' or 'complex'")


def _check_J(J: Sequence[int], d: int) -> tuple:
    J = tuple(sorted(int(j) for j in J))
    if not 1 <= len(J) <= d - 1 or len(set(J)) != len(J) or not all(0 <= j < d for j in J):
        raise InvalidInputError(f"index set must have 1..{d - 1} distinct entries in 0..{d - 1}")
    return J


def min_projection_fixed_image(N: PolytopalNorm, J: Sequence[int]) -> tuple[np.ndarray, float]:
    """Least-norm projection with image ``span{e_j : j in J}``.

    Every such projection is ``Q = I_J (I_J + I_{J^c} Z)^T``, so
    ``<n, Q u> = <n_J, u_J> + n_J^T Z^T u_{J^c}`` is affine in ``Z`` and the
    minimax over vertex/facet pairs is a linear program.
    """
    d = N.dim
    J = _check_J(J, d)
    Jc = tuple(i for i in range(d) if i not in J)
    F, V = N.ball.facet_reps, N.ball.vertex_reps
    h = (F[:, J] @ V[:, J].T).reshape(-1)
    # coefficient of Z[a, b] in row (i, j): V[j, Jc[a]] * F[i, J[b]]
    G = np.einsum("jb,ia->ijba", V[:, Jc], F[:, J]).reshape(len(F) * len(V), -1)
    res = minimax_affine(G, h)
    Z = res.x[:-1].reshape(len(Jc), len(J))
    IJ = np.eye(d)[:, J]
    IJc = np.eye(d)[:, Jc]
    Q = IJ @ (IJ + IJc @ Z).T
    return Q, N.operator_norm(Q)


def one_submatrix_transform(M: MatrixSet, N: PolytopalNorm, J: Sequence[int], depth: int,
                            budget: int = SUBMATRIX_BUDGET) -> tuple[SimilarityTransform, SubmatrixBoundReport]:
    """Similarity fixing ``e_j`` (``j in J``) that moves the other basis vectors into ``ker Q``.

    Then ``(T^{-1} A T)_{J,J}`` is ``A`` compressed by ``Q``, so its JSR is at
    most ``||Q|| rho <= delta(|J|) rho``.
    """
    d = N.dim
    J = _check_J(J, d)
    Q, value = min_projection_fixed_image(N, J)
    T = np.eye(d)
    for i in range(d):
        if i not in J:
            T[:, i] = np.eye(d)[:, i] - Q[:, i]  # Q e_i lies in span(e_J), so this is in ker Q
    if np.linalg.matrix_rank(T) < d:
        raise NumericalFailureError("kernel basis is degenerate")
    Tr = SimilarityTransform(T)
    PJ = np.zeros((d, d))
    PJ[J, J] = 1.0
    resid = float(np.max(np.abs(Tr.T_inv @ Q @ T - PJ)))
    if resid > 1e-9:
        raise NumericalFailureError(f"T^-1 Q T differs from the coordinate projection by {resid:.3g}")
    rho = jsr_bounds(M, 1, N).upper
    sub = Tr.apply(M).principal(J)
    NJ = section_norm(N, T[:, J])
    b = jsr_bounds(sub, depth, NJ, budget=budget)
    m = len(J)
    bound = delta(m) * rho
    rep = SubmatrixBoundReport(J, b.upper, bound, b.upper <= bound * (1 + 1e-9), b.depth, "delta(m)*rho",
                               b.partial, True,
                               {"rho_sub_lower": b.lower, "projection_norm": value,
                                "sqrt_m_bound": sqrt(m) * rho, "within_sqrt_m": b.upper <= sqrt(m) * rho * (1 + 1e-9),
                                "kernel_residual": resid})
    return Tr, rep
