"""Centrally symmetric polytopes used as unit balls of norms.

A polytope ``K = conv(V ∪ -V)`` is stored by one representative per
antipodal pair, both for vertices and for facets.  Facet normals are scaled
so that the facet lies in ``{x : <n, x> = 1}``; with that scaling

    ||x||_K  = max_i |<n_i, x>|        (facet reps)
    ||y||_K* = max_j |<v_j, y>|        (vertex reps)

Full vertex / facet lists are indexed ``0..2p-1`` with index ``k < p``
meaning ``+rep[k]`` and ``k >= p`` meaning ``-rep[k - p]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DegeneratePolytopeError,
    DimensionMismatchError,
    InvalidInputError,
    UnsupportedDimensionError,
)

INCIDENCE_TOL = 1e-9
DEDUP_TOL = 1e-12


def _canonical_sign(x: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Return ``x`` or ``-x`` so that the first non-negligible coordinate is positive."""
    scale = max(np.max(np.abs(x)), 1.0)
    for c in x:
        if abs(c) > tol * scale:
            return x if c > 0 else -x
    return x


def _unique_up_to_sign(points: np.ndarray, tol: float) -> np.ndarray:
    """Drop zero rows and rows equal (up to sign) to an earlier row; order is kept."""
    kept: list[np.ndarray] = []
    for p in points:
        scale = max(np.max(np.abs(p)), 1e-300)
        if np.max(np.abs(p)) <= tol:
            continue
        dup = False
        for q in kept:
            if np.max(np.abs(p - q)) <= tol * max(scale, 1.0) or np.max(np.abs(p + q)) <= tol * max(scale, 1.0):
                dup = True
                break
        if not dup:
            kept.append(p)
    return np.array(kept, dtype=float).reshape(len(kept), points.shape[1])


@dataclass(frozen=True, eq=False)
class SymmetricPolytope:
    vertex_reps: np.ndarray
    facet_reps: np.ndarray
    incidence: tuple = field(default=())

    def __post_init__(self):
        V = np.asarray(self.vertex_reps, dtype=float)
        F = np.asarray(self.facet_reps, dtype=float)
        if V.ndim != 2 or F.ndim != 2 or V.shape[1] != F.shape[1]:
            raise InvalidInputError("vertex and facet arrays must be 2-d with equal width")
        V.setflags(write=False)
        F.setflags(write=False)
        object.__setattr__(self, "vertex_reps", V)
        object.__setattr__(self, "facet_reps", F)
        if not self.incidence:
            object.__setattr__(self, "incidence", _incidence(V, F))

    @property
    def dim(self) -> int:
        return self.vertex_reps.shape[1]

    @property
    def vertices(self) -> np.ndarray:
        """All ``2p`` vertices: the reps followed by their negatives."""
        return np.vstack([self.vertex_reps, -self.vertex_reps])

    @property
    def facets(self) -> np.ndarray:
        """All ``2m`` scaled facet normals: the reps followed by their negatives."""
        return np.vstack([self.facet_reps, -self.facet_reps])

    def check(self, tol: float = INCIDENCE_TOL) -> None:
        """Verify the stored data describes a valid full-dimensional symmetric polytope."""
        V, F = self.vertex_reps, self.facet_reps
        if np.linalg.matrix_rank(V) < self.dim or np.linalg.matrix_rank(F) < self.dim:
            raise DegeneratePolytopeError("polytope is not full-dimensional")
        G = F @ V.T
        if np.max(np.abs(G)) > 1 + tol:
            raise InvalidInputError("a vertex violates a facet constraint")
        for i, inc in enumerate(self.incidence):
            for j, s in inc:
                if abs(G[i, j] - s) > tol:
                    raise InvalidInputError(f"stored incidence ({i}, {j}) is not tight")

    def dual(self) -> "SymmetricPolytope":
        """Polar body: vertex reps and facet reps swap roles."""
        inc = [set() for _ in range(len(self.vertex_reps))]
        for i, facet in enumerate(self.incidence):
            for j, s in facet:
                inc[j].add((i, s))
        return SymmetricPolytope(self.facet_reps.copy(), self.vertex_reps.copy(),
                                 tuple(frozenset(x) for x in inc))

    def transformed(self, T: np.ndarray) -> "SymmetricPolytope":
        """Image ``T K``; vertices map by ``T``, normals by ``T^{-T}``."""
        T = np.asarray(T, dtype=float)
        Tinv = np.linalg.inv(T)
        return SymmetricPolytope(self.vertex_reps @ T.T, self.facet_reps @ Tinv, self.incidence)

    def edges(self) -> list[tuple[int, int]]:
        """Pairs of full-vertex indices whose shared facets span a ridge (d-1 of them, independent)."""
        Vall = self.vertices
        Fall = self.facets
        active = np.abs(Fall @ Vall.T - 1.0) <= INCIDENCE_TOL
        out = []
        d = self.dim
        for i, j in itertools.combinations(range(len(Vall)), 2):
            shared = np.nonzero(active[:, i] & active[:, j])[0]
            if len(shared) >= d - 1 and np.linalg.matrix_rank(Fall[shared]) >= d - 1:
                out.append((i, j))
        return out


def _incidence(V: np.ndarray, F: np.ndarray) -> tuple:
    G = F @ V.T
    inc = []
    for i in range(F.shape[0]):
        s = set()
        for j in range(V.shape[0]):
            if abs(G[i, j] - 1.0) <= INCIDENCE_TOL:
                s.add((j, 1))
            elif abs(G[i, j] + 1.0) <= INCIDENCE_TOL:
                s.add((j, -1))
        inc.append(frozenset(s))
    return tuple(inc)


def hull_from_points(points, dim: int | None = None) -> SymmetricPolytope:
    """Symmetric convex hull ``conv(P ∪ -P)`` by brute-force facet enumeration.

    Every facet hyperplane ``<n, x> = 1`` passes through ``d`` affinely
    independent points of ``P ∪ -P`` and contains at most one of ``±p``, so
    it suffices to try ``d``-subsets of representatives with the sign of the
    first one fixed.  Representatives keep their input order and sign.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if dim is not None and P.shape[1] != dim:
        raise DimensionMismatchError(f"points have width {P.shape[1]}, expected {dim}")
    d = P.shape[1]
    if d not in (2, 3, 4):
        raise UnsupportedDimensionError(f"hull_from_points supports d in {{2,3,4}}, got {d}")
    if not np.all(np.isfinite(P)):
        raise InvalidInputError("non-finite coordinates")
    reps = _unique_up_to_sign(P, DEDUP_TOL)
    if len(reps) < d or np.linalg.matrix_rank(reps, tol=1e-10 * max(1.0, np.max(np.abs(reps)))) < d:
        raise DegeneratePolytopeError("points do not span the ambient space")

    n = len(reps)
    combos = np.array(list(itertools.combinations(range(n), d)), dtype=int)
    signs = np.array([(1,) + s for s in itertools.product((1, -1), repeat=d - 1)], dtype=float)
    mats = reps[combos]  # (C, d, d)
    mats = mats[:, None, :, :] * signs[None, :, :, None]  # (C, S, d, d)
    mats = mats.reshape(-1, d, d)
    det = np.linalg.det(mats)
    scale = np.max(np.abs(reps)) ** d
    ok = np.abs(det) > 1e-12 * scale
    mats = mats[ok]
    normals = np.linalg.solve(mats, np.ones((len(mats), d, 1)))[..., 0]
    feas = np.max(np.abs(normals @ reps.T), axis=1) <= 1 + INCIDENCE_TOL
    normals = normals[feas]
    if len(normals) == 0:
        raise DegeneratePolytopeError("no supporting hyperplanes found")

    facets: list[np.ndarray] = []
    for nv in normals:
        nv = _canonical_sign(nv)
        tol = INCIDENCE_TOL * max(1.0, np.max(np.abs(nv)))
        if not any(np.max(np.abs(nv - f)) <= tol for f in facets):
            facets.append(nv)
    F = np.array(facets)

    G = np.abs(F @ reps.T) >= 1 - INCIDENCE_TOL
    vert = [j for j in range(n) if G[:, j].sum() >= d and np.linalg.matrix_rank(F[G[:, j]]) == d]
    V = reps[vert]
    return SymmetricPolytope(V, F)


def from_facets(normals) -> SymmetricPolytope:
    """Polytope ``{x : |<n_i, x>| <= 1}``, computed as the polar of ``hull(normals)``."""
    return hull_from_points(normals).dual()


def cube(d: int) -> SymmetricPolytope:
    """The ``l_inf`` unit ball."""
    V = np.array([(1.0,) + s for s in itertools.product((1.0, -1.0), repeat=d - 1)])
    return SymmetricPolytope(V, np.eye(d))


def cross_polytope(d: int) -> SymmetricPolytope:
    """The ``l_1`` unit ball."""
    return cube(d).dual()


def regular_polygon(k: int, radius: float = 1.0) -> SymmetricPolytope:
    """Centrally symmetric regular ``2k``-gon inscribed in the circle of the given radius."""
    ang = np.pi * np.arange(k) / k
    return hull_from_points(radius * np.column_stack([np.cos(ang), np.sin(ang)]))


class PolytopalNorm:
    """Norm whose unit ball is a :class:`SymmetricPolytope`."""

    def __init__(self, ball: SymmetricPolytope):
        self.ball = ball

    @property
    def dim(self) -> int:
        return self.ball.dim

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionMismatchError(f"vector of length {x.shape[-1]} for a {self.dim}-dim norm")
        return x

    def norm(self, x) -> float:
        x = self._check(x)
        return float(np.max(np.abs(self.ball.facet_reps @ x)))

    def norms(self, X) -> np.ndarray:
        """Row-wise norms of a stack of vectors."""
        X = self._check(X)
        return np.max(np.abs(X @ self.ball.facet_reps.T), axis=-1)

    def dual_norm(self, y) -> float:
        y = self._check(y)
        return float(np.max(np.abs(self.ball.vertex_reps @ y)))

    def operator_norm(self, A) -> float:
        A = np.asarray(A, dtype=float)
        if A.shape != (self.dim, self.dim):
            raise DimensionMismatchError(f"matrix of shape {A.shape} for a {self.dim}-dim norm")
        return float(np.max(np.abs(self.ball.facet_reps @ A @ self.ball.vertex_reps.T)))

    def operator_norms(self, stack: np.ndarray) -> np.ndarray:
        """Operator norms of a ``(k, d, d)`` stack."""
        F, V = self.ball.facet_reps, self.ball.vertex_reps
        vals = np.einsum("md,kde,pe->kmp", F, stack, V, optimize=True)
        return np.max(np.abs(vals).reshape(len(stack), -1), axis=1)


def norm(N: PolytopalNorm, x) -> float:
    return N.norm(x)


def dual_norm(N: PolytopalNorm, y) -> float:
    return N.dual_norm(y)


def facet_of_point(N: PolytopalNorm, x, tol: float = INCIDENCE_TOL) -> tuple[int, np.ndarray]:
    """Facet active at a boundary point ``x``.

    Returns the index into ``N.ball.facets`` (smallest one on ties) and the
    supporting functional ``phi`` with ``phi(x) = 1`` and ``|phi| <= 1`` on K.
    """
    x = N._check(x)
    vals = N.ball.facets @ x
    if abs(np.max(np.abs(vals)) - 1.0) > tol:
        raise InvalidInputError(f"point has norm {np.max(np.abs(vals))!r}, not on the unit sphere")
    idx = int(np.nonzero(vals >= 1.0 - tol)[0][0])
    return idx, N.ball.facets[idx].copy()


# -- SVG ---------------------------------------------------------------------

# Oblique view used for 3-d wireframes (projected images of e1, e2, e3).
_VIEW3 = np.array([[0.481741, -0.248942], [0.876313, 0.136837], [0.000014, 0.958803]])
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _polygon_order(P2: np.ndarray) -> np.ndarray:
    ang = np.arctan2(P2[:, 1], P2[:, 0])
    return P2[np.argsort(ang, kind="stable")]


def render_svg(P: SymmetricPolytope, overlays: Sequence = (), size: int = 400) -> str:
    """Deterministic SVG drawing of a 2-d ball or a 3-d wireframe.

    ``overlays`` holds further polytopes (drawn as outlines) or vectors (drawn
    as arrows from the origin), in the given order.
    """
    d = P.dim
    if d not in (2, 3):
        raise UnsupportedDimensionError(f"render_svg supports d in {{2,3}}, got {d}")
    proj = (lambda X: np.asarray(X, dtype=float)) if d == 2 else (lambda X: np.asarray(X, dtype=float) @ _VIEW3)

    pts = [proj(P.vertices)]
    for ov in overlays:
        if isinstance(ov, SymmetricPolytope):
            if ov.dim != d:
                raise DimensionMismatchError("overlay dimension differs from base polytope")
            pts.append(proj(ov.vertices))
        else:
            pts.append(proj(np.atleast_2d(ov)))
    extent = max(float(np.max(np.abs(np.vstack(pts)))), 1e-12) * 1.1
    s = size / (2 * extent)

    def xy(p):
        return f"{size / 2 + s * p[0]:.6f},{size / 2 - s * p[1]:.6f}"

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<line x1="0" y1="{size / 2}" x2="{size}" y2="{size / 2}" stroke="#888" stroke-width="0.5"/>',
        f'<line x1="{size / 2}" y1="0" x2="{size / 2}" y2="{size}" stroke="#888" stroke-width="0.5"/>',
    ]

    def draw_poly(Q: SymmetricPolytope, color: str, fill: str, layer: str):
        if d == 2:
            ring = _polygon_order(Q.vertices)
            path = " ".join(("M" if k == 0 else "L") + xy(p) for k, p in enumerate(ring)) + " Z"
            lines.append(f'<path class="{layer}" d="{path}" fill="{fill}" stroke="{color}" stroke-width="1"/>')
        else:
            Vp = proj(Q.vertices)
            for i, j in Q.edges():
                a, b = xy(Vp[i]).split(","), xy(Vp[j]).split(",")
                lines.append(f'<line class="{layer} edge" x1="{a[0]}" y1="{a[1]}" x2="{b[0]}" y2="{b[1]}" '
                             f'stroke="{color}" stroke-width="1"/>')
        for p in proj(Q.vertices):
            c = xy(p).split(",")
            lines.append(f'<circle class="{layer} vertex" cx="{c[0]}" cy="{c[1]}" r="2" fill="{color}"/>')

    draw_poly(P, "#000000", "#6495ed" if d == 2 else "none", "base")
    for k, ov in enumerate(overlays):
        color = _PALETTE[k % len(_PALETTE)]
        if isinstance(ov, SymmetricPolytope):
            draw_poly(ov, color, "none", f"overlay{k}")
        else:
            for p in proj(np.atleast_2d(ov)):
                c = xy(p).split(",")
                lines.append(f'<line class="overlay{k} arrow" x1="{size / 2}" y1="{size / 2}" x2="{c[0]}" '
                             f'y2="{c[1]}" stroke="{color}" stroke-width="2"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
