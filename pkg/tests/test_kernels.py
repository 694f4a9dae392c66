import numpy as np
import pytest
import scipy.linalg as la
from hypothesis import given, settings
from hypothesis import strategies as st

from gpplan.kernels import (
    FullyIndependentConditional,
    InducingSet,
    SquaredExponential,
    SubsetOfRegressors,
    cross_vector,
    gram_matrix,
)
from gpplan.linalg import chol_factor


def make_families(rng):
    kernel = SquaredExponential(lengthscale=0.3)
    z = rng.uniform(0, 1, (4, 2))
    ind = InducingSet(kernel, z)
    return [kernel, SubsetOfRegressors(ind), FullyIndependentConditional(ind)]


@pytest.mark.parametrize("variance", [1.0, 0.5, 4.0])
def test_zero_distance_equals_signal_variance(variance):
    k = SquaredExponential(lengthscale=0.7, signal_variance=variance)
    x = np.array([0.3, -1.2])
    assert k(x, x) == pytest.approx(variance, abs=0.0)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=200, deadline=None)
def test_exact_kernel_symmetry(x0, x1, y0, y1):
    k = SquaredExponential(lengthscale=0.4, signal_variance=2.0)
    a, b = np.array([x0, x1]), np.array([y0, y1])
    assert k(a, b) == k(b, a)


def test_sparse_kernel_symmetry():
    rng = np.random.default_rng(0)
    for kern in make_families(rng)[1:]:
        for _ in range(50):
            a, b = rng.uniform(0, 1, 2), rng.uniform(0, 1, 2)
            assert kern(a, b) == pytest.approx(kern(b, a), abs=1e-15)


def test_invalid_hyperparameters():
    with pytest.raises(ValueError):
        SquaredExponential(lengthscale=0.0)
    with pytest.raises(ValueError):
        SquaredExponential(lengthscale=1.0, signal_variance=-1.0)
    with pytest.raises(ValueError):
        SquaredExponential(lengthscale=1.0, jitter=-1e-9)


def test_dimension_mismatch_and_nonfinite():
    k = SquaredExponential(lengthscale=0.3)
    with pytest.raises(ValueError):
        k(np.array([0.1, 0.2]), np.array([0.1]))
    with pytest.raises(ValueError):
        k(np.array([np.nan, 0.2]), np.array([0.1, 0.2]))


def test_gram_single_point_is_signal_variance():
    k = SquaredExponential(lengthscale=0.3)
    assert gram_matrix(k, np.array([[0.4]])) == pytest.approx(np.array([[1.0]]))


def test_gram_duplicate_points_unjittered_fails():
    k = SquaredExponential(lengthscale=0.3, jitter=0.0)
    gram = gram_matrix(k, np.array([[0.4], [0.4]]))
    with pytest.raises(la.LinAlgError):
        chol_factor(gram, k.gram_jitter)


def test_gram_psd_all_families():
    rng = np.random.default_rng(7)
    for kern in make_families(rng):
        for _ in range(100):
            pts = rng.uniform(0, 1, (int(rng.integers(2, 8)), 2))
            eig = np.linalg.eigvalsh(gram_matrix(kern, pts))
            assert eig[0] >= -1e-10 * max(eig[-1], 1.0)


def test_gram_random_five_points_eigenvalue_floor():
    # independent eigendecomposition oracle for the PSD claim
    rng = np.random.default_rng(11)
    k = SquaredExponential(lengthscale=0.25)
    pts = rng.uniform(0, 1, (5, 2))
    eig = np.linalg.eigvalsh(gram_matrix(k, pts))
    assert np.all(eig >= -1e-12)


def test_cross_vector_single_and_entrywise():
    rng = np.random.default_rng(3)
    for kern in make_families(rng):
        x = rng.uniform(0, 1, 2)
        assert cross_vector(kern, x[None, :], x)[0] == pytest.approx(kern(x, x), abs=0.0)
        pts = rng.uniform(0, 1, (10, 2))
        vec = cross_vector(kern, pts, x)
        for i in range(10):
            assert vec[i] == pytest.approx(kern(x, pts[i]), rel=1e-13, abs=1e-15)


def test_sor_cross_vector_matches_matrix_product_on_inducing_subset(kernel, inducing):
    # X a subset of Z: the SoR cross vector must equal the base-kernel row
    sor = SubsetOfRegressors(inducing)
    x_set = inducing.points[:3]
    for i, z in enumerate(inducing.points):
        got = cross_vector(sor, x_set, z)
        want = kernel.pairwise(z[None, :], x_set)[0]
        np.testing.assert_allclose(got, want, atol=1e-8)


def test_sor_interpolates_base_kernel_at_inducing_points(inducing, kernel):
    sor = SubsetOfRegressors(inducing)
    for a in inducing.points:
        for b in inducing.points:
            assert sor(a, b) == pytest.approx(kernel(a, b), abs=1e-8)


def test_fic_restores_exact_diagonal(inducing, kernel):
    fic = FullyIndependentConditional(inducing)
    rng = np.random.default_rng(4)
    for _ in range(20):
        x = rng.uniform(0, 1, 2)
        assert fic(x, x) == pytest.approx(kernel(x, x), abs=0.0)


def test_conditional_independence_identity(inducing):
    # independent oracle: explicit inverse of the unjittered inducing Gram
    rng = np.random.default_rng(5)
    kz_inv = np.linalg.inv(inducing.gram)
    sor = SubsetOfRegressors(inducing)
    fic = FullyIndependentConditional(inducing)
    for _ in range(50):
        a, b = rng.uniform(0, 1, 2), rng.uniform(0, 1, 2)
        ka = inducing.kernel.pairwise(a[None, :], inducing.points)[0]
        kb = inducing.kernel.pairwise(b[None, :], inducing.points)[0]
        nystrom = ka @ kz_inv @ kb
        assert abs(sor(a, b) - nystrom) < 1e-10
        assert abs(fic(a, b) - nystrom) < 1e-10  # distinct points almost surely


def test_nystrom_dominance(inducing):
    sor = SubsetOfRegressors(inducing)
    rng = np.random.default_rng(6)
    pts = rng.uniform(-0.5, 1.5, (200, 2))
    assert np.all(inducing.kernel.diag(pts) - sor.diag(pts) >= -1e-10)


def test_fic_gram_keeps_duplicates_nondegenerate(inducing):
    fic = FullyIndependentConditional(inducing)
    x = np.array([[0.3, 0.3], [0.3, 0.3], [0.6, 0.7]])
    gram = fic.gram(x)
    # index-delta semantics: duplicate rows stay distinct measurements
    eig = np.linalg.eigvalsh(gram)
    assert eig[0] > 1e-6
    # but a cross between different sets uses coordinate coincidence
    assert fic.pairwise(x[:1], x[1:2])[0, 0] == pytest.approx(
        inducing.kernel(x[0], x[0]), abs=0.0
    )


def test_inducing_set_validation(kernel):
    with pytest.raises(ValueError):
        InducingSet(kernel, np.array([[0.1, 0.2], [0.1, 0.2]]))
    with pytest.raises(ValueError):
        InducingSet(kernel, np.zeros((0, 2)))


def test_inducing_factorization_reproduces_gram(inducing):
    lower = inducing.chol
    target = inducing.gram + inducing.kernel.gram_jitter * np.eye(inducing.size)
    resid = np.abs(lower @ lower.T - target).max()
    assert resid <= 1e-10 * np.abs(inducing.gram).max()
