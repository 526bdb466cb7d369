"""Command-line front end: ``jsr <command> ...``.

Exit codes: 0 success, 1 invalid input, 2 numerical failure (or an
uncertified result under ``--strict``).  Inputs may name a built-in catalog
entry instead of a file, e.g. ``--input catalog:example-pair`` or
``--ball catalog:icosahedron``.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .auerbach import auerbach_basis, normalize_entries, transform_from_basis, verify_sandwich
from .errors import InvalidInputError, JsrError, ZeroJsrError
from .extremal import EXAMPLE_SMP_WORD, SmpCandidate, build_invariant_polytope, example_pair
from .matset import MatrixSet, jsr_bounds
from .pairs import normalize_pair
from .polytope import PolytopalNorm, SymmetricPolytope, cross_polytope, cube, render_svg
from .positions import john_transform, one_submatrix_transform, verify_all_submatrices_bound
from .shady import (
    icosahedron_ball,
    icosahedron_catalog,
    icosahedron_norm,
    shadiness_estimate,
    submatrix_witness,
    tailored_matrix_set,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# -- inputs --------------------------------------------------------------------

def _catalog_ball(name: str) -> SymmetricPolytope:
    if name == "icosahedron":
        return icosahedron_ball()
    if name == "example":
        M = example_pair()
        return build_invariant_polytope(M, SmpCandidate.from_word(M, EXAMPLE_SMP_WORD)).ball
    for prefix, make in (("cube", cube), ("cross", cross_polytope)):
        if name.startswith(prefix):
            d = name[len(prefix):] or "3"
            if not d.isdigit():
                break
            return make(int(d))
    raise InvalidInputError(f"unknown catalog ball {name!r} (icosahedron, example, cubeD, crossD)")


def _catalog_set(name: str) -> list[np.ndarray]:
    if name == "example-pair":
        return list(example_pair().matrices)
    if name == "icosahedron-set":
        return list(tailored_matrix_set(icosahedron_norm()).matrices)
    raise InvalidInputError(f"unknown catalog set {name!r} (example-pair, icosahedron-set)")


class _Inputs:
    def __init__(self):
        self.digests: dict = {}

    def _doc(self, key: str, spec: str):
        doc = io.read_json(spec)
        self.digests[key] = io.file_digest(spec)
        return doc

    def matrices(self, key: str, spec: str) -> list[np.ndarray]:
        if spec.startswith("catalog:"):
            self.digests[key] = spec
            return _catalog_set(spec[8:])
        return io.parse_matrices(self._doc(key, spec))

    def matrix_set(self, key: str, spec: str) -> MatrixSet:
        return MatrixSet(self.matrices(key, spec))

    def ball(self, key: str, spec: str) -> SymmetricPolytope:
        if spec.startswith("catalog:"):
            self.digests[key] = spec
            return _catalog_ball(spec[8:])
        return io.parse_ball(self._doc(key, spec))

    def transform(self, key: str, spec: str) -> np.ndarray:
        return io.parse_transform(self._doc(key, spec))


def _index_set(text: str, d: int | None = None) -> tuple:
    try:
        J = tuple(int(x) - 1 for x in text.split(",") if x.strip())
    except ValueError:
        raise InvalidInputError(f"index set {text!r} must be comma-separated integers") from None
    if not J or min(J) < 0 or (d is not None and max(J) >= d):
        raise InvalidInputError(f"index set {text!r} out of range (indices are 1-based)")
    return J


def _word(text: str | None):
    if text is None:
        return None
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise InvalidInputError(f"word {text!r} must be comma-separated 0-based letters") from None


# -- commands ------------------------------------------------------------------

def _extremal_norm(M: MatrixSet, depth: int):
    """Certified invariant polytope from the best word at ``depth``, or None."""
    b = jsr_bounds(M, depth)
    try:
        res = build_invariant_polytope(M, SmpCandidate.from_word(M, b.best_word))
    except JsrError:
        return None
    return res.ball if res.certified else None


def cmd_estimate(a, inp, rep):
    M = inp.matrix_set("input", a.input)
    N, kind = None, "euclidean"
    if a.ball:
        N, kind = PolytopalNorm(inp.ball("ball", a.ball)), "polytopal (given)"
    elif a.norm in ("auto", "extremal"):
        ball = _extremal_norm(M, a.depth)
        if ball is not None:
            N, kind = PolytopalNorm(ball), "polytopal (invariant polytope)"
        elif a.norm == "extremal":
            raise JsrError("no certified invariant polytope found")
    b = jsr_bounds(M, a.depth, N)
    print(f"lower = {b.lower:.12g}")
    print(f"upper = {b.upper:.12g}")
    rep.outputs.update(lower=b.lower, upper=b.upper, depth=b.depth, best_word=list(b.best_word),
                       partial=b.partial, norm=kind, members=len(M))
    rep.certified_flags["bounds"] = not b.partial
    rep.verifications.append("estimate: exhaustive product enumeration with exact pruning")
    return not b.partial


def cmd_normalize(a, inp, rep):
    M = inp.matrix_set("input", a.input)
    Tr, out, r = normalize_entries(M, a.depth, word=_word(a.word), seed=a.seed)
    print(f"max entry = {r.max_entry:.12g}  rho_upper = {r.rho_upper:.12g}  ratio = {r.entry_ratio:.12g}")
    rep.outputs.update(r.to_dict())
    rep.outputs["T"] = Tr.T
    rep.outputs["matrices"] = out.matrices
    rep.certified_flags["entry_bound"] = r.certified and r.entry_bound_ok
    rep.verifications.extend(r.verifications)
    if a.out:
        io.write_json(a.out, {"T": Tr.T, "matrices": out.matrices})
    return r.certified


def cmd_extremal(a, inp, rep):
    M = inp.matrix_set("input", a.input)
    word = _word(a.word) or jsr_bounds(M, a.depth).best_word
    res = build_invariant_polytope(M, SmpCandidate.from_word(M, word), a.max_points)
    print(f"word = {list(word)}  ratio = {res.ratio:.12g}  certified = {res.certified}  "
          f"vertex reps = {len(res.ball.vertex_reps) if res.ball is not None else 0}")
    rep.outputs.update(word=list(word), ratio=res.ratio, iterations=res.iterations, added_points=res.added_points)
    rep.certified_flags["extremal"] = res.certified
    if res.certified:
        rep.verifications.append("extremal: vertex-mapping check")
    if res.ball is not None:
        rep.outputs["ball"] = io.ball_doc(res.ball)
        if a.out:
            io.write_json(a.out, io.ball_doc(res.ball))
    return res.certified


def cmd_auerbach(a, inp, rep):
    N = PolytopalNorm(inp.ball("ball", a.ball))
    B = auerbach_basis(N)
    B.check(N)
    Tr = transform_from_basis(B)
    ok = verify_sandwich(Tr, N, samples=a.samples, seed=a.seed)
    print(f"vertex indices = {[i + 1 for i in B.indices]}  sandwich = {ok}")
    rep.outputs.update(T=Tr.T, y=B.y, indices=list(B.indices), cond=Tr.cond, sandwich=ok)
    rep.certified_flags["sandwich"] = ok
    rep.verifications.append("auerbach: biorthogonality and unit norms; sampled sandwich check")
    if a.out:
        io.write_json(a.out, {"T": Tr.T})
    return ok


def cmd_shady_icosahedron(a, inp, rep):
    cat = icosahedron_catalog()
    N = icosahedron_norm()
    est = shadiness_estimate(N, 2, a.grid_level, a.refine)
    print(f"vertices = {len(cat.vertices)}  facets = {len(cat.facets)}  orbit sizes = {[len(o) for o in cat.orbits]}")
    print(f"shadiness estimate = {est.value:.12g}  (heuristic)")
    M = tailored_matrix_set(N)
    rep.outputs.update(vertices=len(cat.vertices), facets=len(cat.facets), orbit_sizes=[len(o) for o in cat.orbits],
                       tailored_set_size=len(M))
    rep.certified_flags["catalog_exact"] = True
    rep.verifications.append("catalog: exact rational incidence check")
    rep.heuristic.update(shadiness=est.value, grid_level=est.grid_level, refine_rounds=a.refine,
                         argmin=est.argmin, evaluations=est.evaluations)
    return True


def cmd_shady_estimate(a, inp, rep):
    N = PolytopalNorm(inp.ball("ball", a.ball))
    est = shadiness_estimate(N, 2, a.grid_level, a.refine)
    print(f"shadiness estimate = {est.value:.12g}  (heuristic)")
    rep.heuristic.update(shadiness=est.value, grid_level=est.grid_level, refine_rounds=a.refine,
                         argmin=est.argmin, evaluations=est.evaluations)
    return True


def cmd_shady_witness(a, inp, rep):
    N = PolytopalNorm(inp.ball("ball", a.ball))
    M = inp.matrix_set("set", a.set) if a.set else tailored_matrix_set(N)
    T = inp.transform("transform", a.transform) if a.transform else np.eye(N.dim)
    J = _index_set(a.J, N.dim)
    w = submatrix_witness(M, N, T, J)
    print(f"alpha = {w.alpha:.12g}  residual = {w.residual:.3g}  member = {w.member_index}")
    rep.outputs.update(alpha=w.alpha, residual=w.residual, member=w.member_index, z=w.z, J=[j + 1 for j in J])
    rep.certified_flags["alpha_lower_bound"] = True
    rep.verifications.append("witness: eigen-equation residual check")
    return True


def cmd_john(a, inp, rep):
    N = PolytopalNorm(inp.ball("ball", a.ball))
    Tr, c = john_transform(N)
    print(f"inner = {c.inner_max:.12g} (<= 1)  outer = {c.outer_max:.12g} (<= {c.sqrt_d:.12g})")
    rep.outputs.update(T=Tr.T, inner_max=c.inner_max, outer_max=c.outer_max, sqrt_d=c.sqrt_d)
    rep.certified_flags["john_containment"] = True
    rep.verifications.append(c.verification)
    if a.out:
        io.write_json(a.out, {"T": Tr.T})
    return True


def cmd_submatrix_bound(a, inp, rep):
    M = inp.matrix_set("set", a.set)
    ball = inp.ball("ball", a.ball) if a.ball else None
    if a.J:
        if ball is None:
            raise InvalidInputError("--J needs --ball")
        N = PolytopalNorm(ball)
        Tr, r = one_submatrix_transform(M, N, _index_set(a.J, M.dim), a.depth)
        reports = [r]
    else:
        Tr, _, reports = verify_all_submatrices_bound(M, a.depth, ball)
    for r in reports:
        print(f"J = {[j + 1 for j in r.J]}  rho_sub <= {r.rho_sub_upper:.12g}  bound = {r.bound:.12g}  "
              f"satisfied = {r.satisfied}  depth = {r.depth}")
    rep.outputs.update(T=Tr.T, reports=[dict(r.to_dict(), J=[j + 1 for j in r.J]) for r in reports])
    ok = all(r.satisfied for r in reports)
    rep.certified_flags["all_satisfied"] = ok and all(r.certified for r in reports)
    rep.verifications.append("submatrix: product enumeration in the section norm")
    return ok


def cmd_hollowize(a, inp, rep):
    mats = inp.matrices("input", a.input)
    if len(mats) != 2:
        raise InvalidInputError(f"/matrices: expected exactly 2 matrices, got {len(mats)}")
    Tr, (A2, B2), r = normalize_pair(mats[0], mats[1], a.depth, tol=a.tol, seed=a.seed)
    print(f"converged = {r.converged}  residual A = {r.hollow_residual_A:.3g}  residual B = {r.hollow_residual_B:.3g}")
    rep.outputs.update(r.to_dict())
    rep.outputs.update(T=Tr.T, A=A2, B=B2)
    rep.certified_flags["hollow"] = r.converged
    rep.verifications.append("hollowize: direct diagonal evaluation of the transformed pair")
    if a.out:
        io.write_json(a.out, {"T": Tr.T, "matrices": [A2, B2]})
    return r.converged


def cmd_render(a, inp, rep):
    ball = inp.ball("ball", a.ball)
    if a.transform:
        T = inp.transform("transform", a.transform)
        ball = ball.transformed(np.linalg.inv(T))
    svg = render_svg(ball)
    if a.out:
        Path(a.out).write_text(svg)
    else:
        sys.stdout.write(svg)
    rep.outputs.update(vertex_reps=len(ball.vertex_reps), facet_reps=len(ball.facet_reps))
    return True


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--depth", type=int, default=5)
    common.add_argument("--out")
    common.add_argument("--report")
    common.add_argument("--strict", action="store_true", help="exit 2 when a result is not certified")

    p = _Parser(prog="jsr", description="Joint spectral radius normalizations and submatrix bounds.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("estimate", parents=[common], help="two-sided JSR bounds")
    s.add_argument("--input", required=True)
    s.add_argument("--ball")
    s.add_argument("--norm", choices=("auto", "extremal", "euclidean"), default="auto")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("normalize", parents=[common], help="similarity bounding all entries by the JSR")
    s.add_argument("--input", required=True)
    s.add_argument("--word", help="SMP candidate, comma-separated 0-based letters")
    s.set_defaults(func=cmd_normalize)

    s = sub.add_parser("extremal", parents=[common], help="invariant polytope from an SMP candidate")
    s.add_argument("--input", required=True)
    s.add_argument("--word")
    s.add_argument("--max-points", type=int, default=200)
    s.set_defaults(func=cmd_extremal)

    s = sub.add_parser("auerbach", parents=[common], help="Auerbach basis of a polytopal norm")
    s.add_argument("--ball", required=True)
    s.add_argument("--samples", type=int, default=10_000)
    s.set_defaults(func=cmd_auerbach)

    sh = sub.add_parser("shady", help="shadiness and submatrix witnesses")
    shs = sh.add_subparsers(dest="shady_command", required=True, parser_class=_Parser)
    s = shs.add_parser("icosahedron", parents=[common])
    s.add_argument("--grid-level", type=int, default=4)
    s.add_argument("--refine", type=int, default=3)
    s.set_defaults(func=cmd_shady_icosahedron)
    s = shs.add_parser("estimate", parents=[common])
    s.add_argument("--ball", required=True)
    s.add_argument("--grid-level", type=int, default=4)
    s.add_argument("--refine", type=int, default=3)
    s.set_defaults(func=cmd_shady_estimate)
    s = shs.add_parser("witness", parents=[common])
    s.add_argument("--ball", default="catalog:icosahedron")
    s.add_argument("--set")
    s.add_argument("--transform")
    s.add_argument("--J", required=True, help="1-based indices, e.g. 1,2")
    s.set_defaults(func=cmd_shady_witness)

    s = sub.add_parser("john", parents=[common], help="John-position transform")
    s.add_argument("--ball", required=True)
    s.set_defaults(func=cmd_john)

    s = sub.add_parser("submatrix-bound", parents=[common], help="upper bounds on principal-submatrix JSRs")
    s.add_argument("--set", required=True)
    s.add_argument("--ball")
    s.add_argument("--J", help="1-based indices; omit to check every J in John's position")
    s.set_defaults(func=cmd_submatrix_bound)

    s = sub.add_parser("hollowize", parents=[common], help="entry normalization plus hollowization of a pair")
    s.add_argument("--input", required=True)
    s.set_defaults(func=cmd_hollowize)

    s = sub.add_parser("render", parents=[common], help="SVG of a ball (optionally of T^-1 K)")
    s.add_argument("--ball", required=True)
    s.add_argument("--transform")
    s.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    command = a.command if a.command != "shady" else f"shady {a.shady_command}"
    rep = io.RunReport(command=command, seed=a.seed)
    inp = _Inputs()
    t0 = time.perf_counter()
    try:
        certified = a.func(a, inp, rep)
    except (InvalidInputError, ZeroJsrError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except JsrError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    rep.inputs = inp.digests
    rep.wall_time = time.perf_counter() - t0
    if a.report:
        io.save_report(a.report, rep)
    if a.strict and not certified:
        print("result not certified (--strict)", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
