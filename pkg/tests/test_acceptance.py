"""Acceptance criteria, one test each.

Every test appends a ``criterion N: PASS|FAIL`` line that the terminal
summary prints at the end of the run, and prints it immediately as well.
"""

import time
from contextlib import contextmanager
from math import sqrt

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES

from jsrnorm.auerbach import auerbach_basis, normalize_entries, transform_from_basis, verify_sandwich
from jsrnorm.extremal import EXAMPLE_RHO, EXAMPLE_SMP_WORD
from jsrnorm.matset import MatrixSet, jsr_bounds
from jsrnorm.pairs import hollowize_pair, hollowize_single, normalize_pair, trace_adjusted
from jsrnorm.polytope import PolytopalNorm, cross_polytope, cube
from jsrnorm.positions import (
    delta,
    john_ellipsoid,
    john_transform,
    min_projection_fixed_image,
    verify_all_submatrices_bound,
)
from jsrnorm.shady import (
    ICOSA_ORBIT_SIZES,
    icosahedron_ball,
    icosahedron_catalog,
    icosahedron_norm,
    shadiness_estimate,
    submatrix_witness,
    tailored_matrix_set,
)

RHO = (48 + 16 * sqrt(5)) ** 0.2


@contextmanager
def criterion(n: int, title: str):
    """Time the block and log one pass/fail line for criterion ``n``."""
    info = {}
    t0 = time.perf_counter()
    ok = False
    try:
        yield info
        ok = True
    finally:
        dt = time.perf_counter() - t0
        extra = "  ".join(f"{k}={v}" for k, v in info.items())
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}  ({dt:.2f} s)  {extra}".rstrip()
        ACCEPTANCE_LINES.append(line)
        print(line)


def test_criterion_01_example_jsr(pair, example_ball):
    with criterion(1, "example JSR with extremal ball") as info:
        t0 = time.perf_counter()
        b = jsr_bounds(pair, 5, PolytopalNorm(example_ball))
        dt = time.perf_counter() - t0
        info.update(lower=f"{b.lower:.15g}", upper=f"{b.upper:.15g}")
        assert abs(b.lower - RHO) <= 1e-9 and abs(b.upper - RHO) <= 1e-9
        assert abs(RHO - 2.4245) < 1e-4
        assert dt < 1.0


def test_criterion_02_example_normalization(pair, example_ball):
    with criterion(2, "example entry normalization") as info:
        t0 = time.perf_counter()
        _, Mt, rep = normalize_entries(pair, 5, word=EXAMPLE_SMP_WORD, ball=example_ball)
        dt = time.perf_counter() - t0
        A1, A2 = Mt.matrices
        info.update(max_entry=f"{rep.max_entry:.15g}")
        np.testing.assert_allclose(A1, [[1.7454, 2.1998], [-1.6163, 0.2546]], atol=1e-3)
        np.testing.assert_allclose(A2, [[0.0, -1.6498], [2.4245, 0.0]], atol=1e-3)
        assert rep.max_entry <= RHO + 1e-9
        assert dt < 1.0


def test_criterion_03_sandwich(example_ball):
    with criterion(3, "sandwich l_inf <= ||.||_T <= l_1") as info:
        cases = [PolytopalNorm(example_ball)]
        cases += [PolytopalNorm(make(d)) for make in (cube, cross_polytope) for d in (2, 3, 4)]
        for N in cases:
            Tr = transform_from_basis(auerbach_basis(N))
            assert verify_sandwich(Tr, N, samples=10_000, seed=0, tol=1e-9)
        info.update(norms=len(cases))


def test_criterion_04_icosahedron_catalog():
    with criterion(4, "icosahedron catalog exactness") as info:
        t0 = time.perf_counter()
        cat = icosahedron_catalog()
        assert len(cat.vertices) == 12 and len(cat.facets) == 20
        assert tuple(len(o) for o in cat.orbits) == ICOSA_ORBIT_SIZES == (6, 6, 2, 6)
        count = 0
        for w, on in zip(cat.facets, cat.incidence):
            for j in on:
                assert sum(a * b for a, b in zip(w, cat.vertices[j])) == 1
                count += 1
        info.update(incidences=count)
        assert count == 60
        assert time.perf_counter() - t0 < 1.0


def test_criterion_05_tailored_jsr():
    with criterion(5, "tailored set JSR is [1, 1]") as info:
        N = icosahedron_norm()
        M = tailored_matrix_set(N)
        b = jsr_bounds(M, 3, N)
        info.update(members=len(M), lower=f"{b.lower:.15g}", upper=f"{b.upper:.15g}")
        assert abs(b.lower - 1) <= 1e-9 and abs(b.upper - 1) <= 1e-9


def test_criterion_06_shadiness():
    with criterion(6, "shadiness estimates") as info:
        t0 = time.perf_counter()
        est = shadiness_estimate(icosahedron_norm(), rank=2, grid_level=4, refine=3)
        c = shadiness_estimate(PolytopalNorm(cube(3)), rank=2, grid_level=4, refine=3)
        x = shadiness_estimate(PolytopalNorm(cross_polytope(3)), rank=2, grid_level=4, refine=3)
        dt = time.perf_counter() - t0
        info.update(icosahedron=f"{est.value:.10g}", cube=f"{c.value:.12g}", cross=f"{x.value:.12g}")
        assert est.value >= 1.01
        assert abs(c.value - 1) <= 1e-9 and abs(x.value - 1) <= 1e-9
        assert dt < 30.0


def test_criterion_07_submatrix_witnesses():
    with criterion(7, "submatrix witnesses alpha >= 1.01") as info:
        t0 = time.perf_counter()
        N = icosahedron_norm()
        M = tailored_matrix_set(N)
        rng = np.random.default_rng(2024)
        alphas, resids, n = [], [], 0
        while n < 100:
            T = rng.standard_normal((3, 3))
            if np.linalg.cond(T) > 1e3:
                continue
            n += 1
            for J in ((0, 1), (0, 2), (1, 2)):
                w = submatrix_witness(M, N, T, J)
                alphas.append(w.alpha)
                resids.append(w.residual)
        dt = time.perf_counter() - t0
        info.update(min_alpha=f"{min(alphas):.6g}", max_residual=f"{max(resids):.3g}")
        assert min(alphas) >= 1.01
        assert max(resids) <= 1e-8
        assert dt < 10.0


def test_criterion_08_john(pair, example_ball):
    with criterion(8, "John position and sqrt(d) submatrix bounds") as info:
        t0 = time.perf_counter()
        for N in (PolytopalNorm(cube(3)), PolytopalNorm(cross_polytope(3)), icosahedron_norm(),
                  PolytopalNorm(example_ball)):
            _, rep = john_transform(N)
            assert rep.inner_max <= 1 + 1e-9 and rep.outer_max <= sqrt(N.dim) + 1e-9
        for d in (2, 3, 4):
            Q = john_ellipsoid(PolytopalNorm(cube(d))).Q
            assert np.max(np.abs(Q - np.eye(d))) <= 1e-6
            Q = john_ellipsoid(PolytopalNorm(cross_polytope(d))).Q
            assert np.max(np.abs(Q - np.eye(d) / d)) <= 1e-6 / d
        rng = np.random.default_rng(8)
        for _ in range(5):
            T = rng.standard_normal((3, 3)) + 2 * np.eye(3)
            Q = john_ellipsoid(PolytopalNorm(cube(3).transformed(T))).Q
            ref = T @ T.T
            assert np.linalg.norm(Q - ref) <= 1e-6 * np.linalg.norm(ref)
        _, _, reps_pair = verify_all_submatrices_bound(pair, 6, ball=example_ball)
        _, _, reps_ico = verify_all_submatrices_bound(tailored_matrix_set(icosahedron_norm()), 6,
                                                      ball=icosahedron_ball())
        reps = reps_pair + reps_ico
        dt = time.perf_counter() - t0
        info.update(index_sets=len(reps), partial=sum(r.partial for r in reps),
                    worst_ratio=f"{max(r.rho_sub_upper / r.bound for r in reps):.4g}")
        assert all(r.satisfied for r in reps)
        assert dt < 60.0


def test_criterion_09_delta():
    with criterion(9, "delta bound and fixed-image projections") as info:
        t0 = time.perf_counter()
        assert delta(2, "real") == 4 / 3
        vals = [delta(m, "real") for m in range(1, 65)]
        assert all(v <= sqrt(m) for m, v in enumerate(vals, start=1))
        assert all(a <= b for a, b in zip(vals, vals[1:]))
        ico_pairs = []
        for name, N in (("cube", PolytopalNorm(cube(3))), ("cross", PolytopalNorm(cross_polytope(3))),
                        ("icosahedron", icosahedron_norm())):
            for J in ((0,), (1,), (2,), (0, 1), (0, 2), (1, 2)):
                _, value = min_projection_fixed_image(N, J)
                assert value <= delta(len(J), "real") + 1e-6
                if name == "icosahedron" and len(J) == 2:
                    ico_pairs.append(value)
        info.update(icosahedron_pairs=f"{min(ico_pairs):.6g}..{max(ico_pairs):.6g}")
        assert all(1.01 <= v <= 4 / 3 + 1e-6 for v in ico_pairs)
        assert time.perf_counter() - t0 < 10.0


def test_criterion_10_hollowization(pair):
    with criterion(10, "hollowization") as info:
        t0 = time.perf_counter()
        rng = np.random.default_rng(10)
        worst = 0.0
        for k in range(1000):
            d = 2 + k % 5
            A = rng.standard_normal((d, d))
            H = hollowize_single(A)
            C = H.Qorth.T @ trace_adjusted(A) @ H.Qorth
            worst = max(worst, float(np.max(np.abs(np.diag(C)))))
        assert worst <= 1e-10
        converged = 0
        for s in range(50):
            A, B = np.random.default_rng(s).standard_normal((2, 3, 3))
            converged += hollowize_pair(A, B, tol=1e-8).converged
        A, B = pair.matrices
        _, (A2, _), rep = normalize_pair(A, B, 5, word=EXAMPLE_SMP_WORD)
        dt = time.perf_counter() - t0
        info.update(single_worst=f"{worst:.2g}", pairs_converged=f"{converged}/50",
                    traces=list(rep.traces), row_col_within_sqrt_d=rep.row_col_within_sqrt_d)
        assert converged == 50
        assert np.max(np.abs(np.diag(trace_adjusted(A2)))) <= 1e-8
        assert rep.traces_within_bound and rep.trace_bound == pytest.approx(2 * EXAMPLE_RHO)
        assert dt < 60.0


def test_criterion_11_pruning_oracle():
    with criterion(11, "pruned search equals exhaustive enumeration") as info:
        rng = np.random.default_rng(11)
        for s in range(20):
            k, d, depth = 2 + s % 2, 2 + (s // 2) % 2, 1 + s % 6
            M = MatrixSet(rng.standard_normal((k, d, d)))
            a = jsr_bounds(M, depth, prune=True)
            b = jsr_bounds(M, depth, prune=False)
            assert a.lower == b.lower and a.upper == b.upper
            assert a.same_estimate(b)
        info.update(sets=20)
