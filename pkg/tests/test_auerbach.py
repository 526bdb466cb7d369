import numpy as np
import pytest

from jsrnorm.auerbach import (
    SimilarityTransform,
    auerbach_basis,
    normalize_entries,
    transform_from_basis,
    verify_sandwich,
)
from jsrnorm.errors import ZeroJsrError
from jsrnorm.extremal import EXAMPLE_RHO, EXAMPLE_SMP_WORD
from jsrnorm.matset import MatrixSet
from jsrnorm.polytope import PolytopalNorm, cross_polytope, cube, hull_from_points

A1_EXPECTED = np.array([[1.7454, 2.1998], [-1.6163, 0.2546]])
A2_EXPECTED = np.array([[0.0, -1.6498], [2.4245, 0.0]])


@pytest.mark.parametrize("make", [cube, cross_polytope])
@pytest.mark.parametrize("d", [2, 3, 4])
def test_catalog_bases_are_coordinate_vectors(make, d):
    N = PolytopalNorm(make(d))
    B = auerbach_basis(N)
    B.check(N)
    if make is cross_polytope:
        np.testing.assert_allclose(np.abs(B.x), np.eye(d), atol=1e-14)
    Tr = transform_from_basis(B)
    assert verify_sandwich(Tr, N)


def test_example_basis_is_v3_v6(example_ball):
    N = PolytopalNorm(example_ball)
    B = auerbach_basis(N)
    B.check(N)
    assert B.indices == (2, 4)
    Tr = transform_from_basis(B)
    np.testing.assert_allclose(Tr.T[:, 0], [1.10102588180999, 1.31130311398904], atol=1e-10)
    np.testing.assert_allclose(Tr.T[:, 1], [0.346918285537653, -0.107203645890555], atol=1e-10)
    assert verify_sandwich(Tr, N)


def test_sandwich_detects_a_bad_transform(example_ball):
    assert not verify_sandwich(SimilarityTransform(2 * np.eye(2)), PolytopalNorm(cube(2)))
    assert not verify_sandwich(SimilarityTransform(np.eye(2)), PolytopalNorm(example_ball))


def test_biorthogonal_system_inequalities(rng):
    # in Auerbach coordinates every coefficient is at most the norm, and the norm at most their l1 sum
    N = PolytopalNorm(hull_from_points(rng.standard_normal((7, 3))))
    B = auerbach_basis(N)
    B.check(N)
    X = rng.standard_normal((500, 3))
    coeffs = X @ B.y.T
    n = N.norms(X)
    assert np.all(np.max(np.abs(coeffs), axis=1) <= n * (1 + 1e-9))
    assert np.all(n <= np.sum(np.abs(coeffs), axis=1) * (1 + 1e-9))


def test_example_normalization(pair, example_ball):
    Tr, Mt, rep = normalize_entries(pair, 5, word=EXAMPLE_SMP_WORD, ball=example_ball)
    np.testing.assert_allclose(Mt.matrices[0], A1_EXPECTED, atol=1e-3)
    np.testing.assert_allclose(Mt.matrices[1], A2_EXPECTED, atol=1e-3)
    assert rep.certified and rep.path == "irreducible"
    assert rep.max_entry <= EXAMPLE_RHO + 1e-9
    assert rep.entry_bound_ok
    for A, B in zip(pair, Mt):
        np.testing.assert_allclose(Tr.conj(A), B, atol=1e-13)


def test_normalization_builds_ball_when_none_given(pair):
    _, Mt, rep = normalize_entries(pair, 5, word=EXAMPLE_SMP_WORD)
    assert rep.certified
    assert np.max(np.abs(Mt.matrices)) <= EXAMPLE_RHO + 1e-9


def test_reducible_set_uses_block_path():
    M = MatrixSet([np.array([[1.0, 50.0], [0.0, 0.5]]), np.array([[-0.8, 20.0], [0.0, 0.3]])])
    _, Mt, rep = normalize_entries(M, 6)
    assert rep.path.startswith("reducible")
    assert rep.epsilons and all(0 < e <= 1 for e in rep.epsilons)
    assert np.max(np.abs(Mt.matrices)) <= rep.rho_upper * (1 + 1e-9)


def test_identity_set():
    Tr, Mt, rep = normalize_entries(MatrixSet([np.eye(2)]), 3)
    np.testing.assert_allclose(Mt.matrices[0], np.eye(2), atol=1e-14)


def test_zero_jsr_rejected():
    with pytest.raises(ZeroJsrError):
        normalize_entries(MatrixSet([np.array([[0.0, 1], [0, 0]])]), 4)


def test_transform_composition(rng):
    A = SimilarityTransform(rng.standard_normal((3, 3)) + 3 * np.eye(3))
    B = SimilarityTransform(rng.standard_normal((3, 3)) + 3 * np.eye(3))
    C = A.then(B)
    X = rng.standard_normal((3, 3))
    np.testing.assert_allclose(C.conj(X), B.conj(A.conj(X)), atol=1e-12)
