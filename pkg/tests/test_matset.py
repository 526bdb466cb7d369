import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jsrnorm.errors import BudgetExceededError, DimensionMismatchError, InvalidInputError
from jsrnorm.matset import (
    EuclideanNorm,
    MatrixSet,
    bmm,
    check_irreducibility,
    diagonal_jsr_estimate,
    enumerate_products,
    jsr_bounds,
    spectral_radii,
    spectral_radius,
    word_product,
)

RHO_EXAMPLE = (48 + 16 * np.sqrt(5)) ** 0.2


def test_matrixset_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        MatrixSet([])
    with pytest.raises(InvalidInputError):
        MatrixSet([np.ones((2, 3))])
    with pytest.raises(DimensionMismatchError):
        MatrixSet([np.eye(2), np.eye(3)])
    with pytest.raises(InvalidInputError):
        MatrixSet([np.array([[np.nan, 0], [0, 1]])])


def test_matrixset_dedup_keeps_signs():
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    M = MatrixSet([A, A.copy(), -A, A + 1e-14])
    assert len(M) == 2
    assert M.matrices.flags.writeable is False


def test_word_product_rightmost_acts_first(pair):
    A1, A2 = pair.matrices
    np.testing.assert_array_equal(word_product(pair, (0, 1)), A1 @ A2)
    B = word_product(pair, (0, 1, 0, 0, 1))
    np.testing.assert_allclose(B, A1 @ A2 @ A1 @ A1 @ A2)
    with pytest.raises(InvalidInputError):
        word_product(pair, (0, 2))


def test_example_smp_spectral_radius(pair):
    B = word_product(pair, (0, 1, 0, 0, 1))
    assert spectral_radius(B) == pytest.approx(48 + 16 * np.sqrt(5), rel=1e-13)


def test_spectral_radius_repeated_eigenvalues():
    # defective and repeated spectra are where characteristic-polynomial roots lose digits
    J = np.array([[2.0, 1, 0], [0, 2, 1], [0, 0, 2]])
    assert spectral_radius(np.eye(3)) == pytest.approx(1.0, abs=1e-14)
    assert spectral_radius(J) == pytest.approx(2.0, rel=1e-5)
    assert spectral_radius(np.array([[0.0, -1], [1, 0]])) == pytest.approx(1.0, abs=1e-15)
    assert spectral_radius(np.array([[-3.0]])) == 3.0


def test_spectral_radii_matches_numpy(rng):
    for d in (1, 2, 3, 4, 5):
        S = rng.standard_normal((50, d, d))
        np.testing.assert_allclose(spectral_radii(S), np.abs(np.linalg.eigvals(S)).max(axis=1), rtol=1e-10)


def test_bmm_matches_matmul(rng):
    A = rng.standard_normal((7, 3, 3))
    B = rng.standard_normal((7, 3, 3))
    np.testing.assert_allclose(bmm(A, B), A @ B, rtol=1e-14, atol=1e-14)


def test_enumerate_products_order_and_budget(pair):
    words = [w for w, _ in enumerate_products(pair, 3)]
    assert words == list(itertools.product(range(2), repeat=3))
    with pytest.raises(BudgetExceededError):
        list(enumerate_products(pair, 30, budget=1000))


def test_jsr_bounds_euclidean_example(pair):
    b = jsr_bounds(pair, 5)
    assert b.lower == pytest.approx(RHO_EXAMPLE, abs=1e-12)
    assert b.upper > b.lower
    # the maximizing word is a cyclic rotation of 0,1,0,0,1
    w = b.best_word
    rotations = {tuple((0, 1, 0, 0, 1)[i:] + (0, 1, 0, 0, 1)[:i]) for i in range(5)}
    assert w in rotations


def test_jsr_bounds_budget_partial(pair):
    b = jsr_bounds(pair, 12, budget=100)
    assert b.partial and b.depth < 12
    assert b.lower <= b.upper


def test_jsr_bounds_identity_and_zero():
    b = jsr_bounds(MatrixSet([np.eye(3)]), 4)
    assert b.lower == pytest.approx(1.0) and b.upper == pytest.approx(1.0)
    b = jsr_bounds(MatrixSet([np.array([[0.0, 1], [0, 0]])]), 3)
    assert b.lower == 0.0


def _exhaustive(M, depth, N):
    """Independent oracle: plain enumeration with numpy eigvals and ord-2 norms."""
    lower, upper = 0.0, np.inf
    for t in range(1, depth + 1):
        rhos, norms = [], []
        for _, P in enumerate_products(M, t):
            rhos.append(np.max(np.abs(np.linalg.eigvals(P))))
            norms.append(N.operator_norm(P))
        lower = max(lower, max(rhos) ** (1 / t))
        upper = min(upper, max(norms) ** (1 / t))
    return lower, upper


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), k=st.integers(2, 3), d=st.integers(2, 3), depth=st.integers(1, 5))
def test_jsr_bounds_against_plain_enumeration(seed, k, d, depth):
    M = MatrixSet(np.random.default_rng(seed).standard_normal((k, d, d)))
    b = jsr_bounds(M, depth, prune=False)
    lo, up = _exhaustive(M, depth, EuclideanNorm(d))
    assert b.lower == pytest.approx(lo, rel=1e-9)
    assert b.upper == pytest.approx(up, rel=1e-9)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), k=st.integers(2, 3), d=st.integers(2, 3), depth=st.integers(1, 6))
def test_pruning_is_exact(seed, k, d, depth):
    M = MatrixSet(np.random.default_rng(seed).standard_normal((k, d, d)))
    a = jsr_bounds(M, depth, prune=True)
    b = jsr_bounds(M, depth, prune=False)
    assert a.same_estimate(b)


def test_threading_does_not_change_result(pair):
    a = jsr_bounds(pair, 8, threads=1)
    b = jsr_bounds(pair, 8, threads=4)
    assert a.same_estimate(b)


def test_jsr_similarity_invariance(pair, rng):
    T = rng.standard_normal((2, 2)) + 2 * np.eye(2)
    a = jsr_bounds(pair, 8)
    b = jsr_bounds(pair.conjugated(T), 8)
    assert a.lower == pytest.approx(b.lower, rel=1e-9)


def test_diagonal_estimate_in_auerbach_coordinates(pair, example_ball):
    from jsrnorm.auerbach import normalize_entries

    # raw coordinates: a single diagonal entry already exceeds rho
    assert float(diagonal_jsr_estimate(pair, 1)) == 6.0
    _, Mt, _ = normalize_entries(pair, 5, ball=example_ball, word=(0, 1, 0, 0, 1))
    est = diagonal_jsr_estimate(Mt, 5)
    assert float(est) <= RHO_EXAMPLE * (1 + 1e-9)
    assert float(est) == pytest.approx(RHO_EXAMPLE, abs=1e-6)


def test_diagonal_estimate_trivial_cases():
    assert float(diagonal_jsr_estimate(MatrixSet([np.eye(2)]), 3)) == 1.0
    assert float(diagonal_jsr_estimate(MatrixSet([np.array([[0.0, 1], [0, 0]])]), 4)) == 0.0


def test_irreducibility():
    assert check_irreducibility(MatrixSet([np.diag([1.0, 0.5])])).status == "reducible"
    upper = MatrixSet([np.array([[1.0, 2], [0, 3]]), np.array([[0.5, 1], [0, -1]])])
    r = check_irreducibility(upper)
    assert r.status == "reducible"
    w = r.witness[:, 0]
    assert abs(w[1]) < 1e-9
    rot = MatrixSet([np.array([[0.0, -1], [1, 0]]), np.array([[1.0, 1], [0, 1]])])
    assert check_irreducibility(rot).irreducible is True
