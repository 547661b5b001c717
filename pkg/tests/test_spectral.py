import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fsrdcf.spectral import (
    SparseBccb,
    bccb_from_kernel,
    circulant_apply,
    dft2,
    gram,
    hermitian_part,
    idft2,
    is_hermitian,
    reverse_perm,
)
from oracles import dense_bccb, dense_shift_matrix, dft2_matrix, even_plane

ODD = [(M, N) for M in (3, 5, 7) for N in (3, 5, 7)]


def test_dft_of_impulse_is_flat():
    p = np.zeros((3, 3))
    p[0, 0] = 1
    np.testing.assert_allclose(dft2(p), np.full((3, 3), 1 / 3), atol=1e-15)


def test_round_trip(rng):
    p = rng.standard_normal((7, 5))
    assert np.max(np.abs(idft2(dft2(p)) - p)) < 1e-12


def test_parseval(rng):
    p = rng.standard_normal((7, 5)) + 1j * rng.standard_normal((7, 5))
    assert abs(np.linalg.norm(dft2(p)) - np.linalg.norm(p)) / np.linalg.norm(p) < 1e-12
    assert abs(np.linalg.norm(idft2(p)) - np.linalg.norm(p)) / np.linalg.norm(p) < 1e-12


def test_dft2_matches_dense_matrix(rng):
    p = rng.standard_normal((5, 7))
    F = dft2_matrix(5, 7)
    np.testing.assert_allclose(dft2(p).ravel(), F @ p.ravel(), atol=1e-12)


def test_stacks_transform_per_plane(rng):
    p = rng.standard_normal((3, 5, 7))
    np.testing.assert_allclose(dft2(p)[1], dft2(p[1]))


class TestReversePerm:
    def test_definition(self, rng):
        p = rng.standard_normal((5, 7))
        out = reverse_perm(p)
        for k in range(5):
            for l in range(7):
                assert out[k, l] == p[(-k) % 5, (-l) % 7]

    def test_involution(self, rng):
        p = rng.standard_normal((6, 5)) + 1j * rng.standard_normal((6, 5))
        np.testing.assert_array_equal(reverse_perm(reverse_perm(p)), p)

    def test_conjugates_real_spectra(self, rng):
        q = rng.standard_normal((5, 7))
        spec = dft2(q)
        assert np.max(np.abs(reverse_perm(spec) - np.conj(spec))) < 1e-12

    def test_constant_fixed_point(self):
        c = np.full((5, 5), 2.5 + 1j)
        np.testing.assert_array_equal(reverse_perm(c), c)

    def test_is_permutation(self):
        idx = np.arange(35).reshape(5, 7)
        assert sorted(reverse_perm(idx).ravel()) == list(range(35))

    def test_equals_dft_applied_twice(self, rng):
        F = dft2_matrix(5, 3)
        P = F @ F
        p = rng.standard_normal((5, 3))
        np.testing.assert_allclose((P @ p.ravel()).reshape(5, 3), reverse_perm(p), atol=1e-12)

    def test_hermitian_helpers(self, rng):
        q = rng.standard_normal((5, 7))
        assert is_hermitian(dft2(q))
        z = rng.standard_normal((5, 7)) + 1j * rng.standard_normal((5, 7))
        assert not is_hermitian(z)
        assert is_hermitian(hermitian_part(z))


class TestCirculantApply:
    def test_identity_kernel(self, rng):
        k = np.zeros((4, 4))
        k[0, 0] = 1
        v = rng.standard_normal((4, 4))
        np.testing.assert_allclose(circulant_apply(k, v), v, atol=1e-14)

    def test_shift_kernel(self, rng):
        k = np.zeros((4, 5))
        k[1, 0] = 1
        v = rng.standard_normal((4, 5))
        np.testing.assert_allclose(circulant_apply(k, v), np.roll(v, 1, axis=0), atol=1e-14)

    def test_matches_dense(self, rng):
        k = rng.standard_normal((4, 4))
        v = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        dense = dense_bccb(k) @ v.ravel()
        assert np.max(np.abs(circulant_apply(k, v).ravel() - dense)) < 1e-10

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            circulant_apply(np.zeros((3, 3)), np.zeros((3, 5)))


class TestSparseBccb:
    def test_single_entry(self):
        k = np.zeros((5, 5))
        k[2, 3] = 1.5
        op = bccb_from_kernel(k)
        assert op.K == 1

    def test_dense_kernel_keeps_everything(self, rng):
        k = rng.standard_normal((5, 7))
        assert bccb_from_kernel(k, 0.0).K == 35

    def test_threshold(self, rng):
        k = rng.standard_normal((5, 7))
        op = bccb_from_kernel(k, 0.8)
        assert op.K == np.count_nonzero(np.abs(k) > 0.8)

    def test_negative_threshold_rejected(self):
        with pytest.raises(ValueError):
            bccb_from_kernel(np.ones((3, 3)), -1)

    def test_apply_matches_fft_path(self, rng):
        k = rng.standard_normal((6, 5))
        v = rng.standard_normal((6, 5))
        op = bccb_from_kernel(k, 0.5)
        thresholded = np.where(np.abs(k) > 0.5, k, 0)
        assert np.max(np.abs(op.apply(v) - circulant_apply(thresholded, v))) < 1e-12

    def test_sparse_matrix_matches_dense(self, rng):
        k = rng.standard_normal((4, 5))
        op = bccb_from_kernel(k, 0.3)
        np.testing.assert_allclose(op.to_sparse().toarray(), dense_bccb(op.kernel()), atol=1e-14)

    def test_offsets_reduced_modulo_grid(self):
        op = SparseBccb((5, 5), [[-1, 6]], [2.0])
        assert tuple(op.offsets[0]) == (4, 1)


class TestGram:
    def test_identity(self):
        eye = SparseBccb.identity((5, 5))
        g = gram(eye)
        assert g.K == 1 and g.diagonal_value() == 1.0

    def test_matches_dense_product(self, rng):
        k = np.where(rng.random((5, 5)) < 0.3, rng.standard_normal((5, 5)), 0.0)
        op = bccb_from_kernel(k)
        R = dense_bccb(k)
        G = dense_bccb(gram(op).kernel())
        assert np.max(np.abs(G - R.T @ R)) < 1e-10
        assert np.max(np.abs(G - G.T)) < 1e-12
        assert np.linalg.eigvalsh(G).min() > -1e-10

    def test_spectrum_is_squared_magnitude(self, rng):
        k = rng.standard_normal((5, 7))
        g = gram(bccb_from_kernel(k)).kernel()
        M, N = k.shape
        # un-normalized DFT diagonalizes a BCCB operator
        lhs = np.fft.fft2(g)
        rhs = np.abs(np.fft.fft2(k)) ** 2
        assert np.max(np.abs(lhs - rhs)) < 1e-10


# algebraic identities the solver derivation rests on, checked densely

@pytest.mark.parametrize("M,N", ODD)
def test_diagonalization_identity(rng, M, N):
    x = rng.standard_normal((M, N))
    F = dft2_matrix(M, N)
    spec = np.sqrt(M * N) * dft2(x).ravel()
    # convolution form and the shift (data) matrix form
    assert np.max(np.abs(dense_bccb(x) - F.conj().T @ np.diag(spec) @ F)) < 1e-10
    assert np.max(np.abs(dense_shift_matrix(x) - F @ np.diag(spec) @ F.conj().T)) < 1e-10


@pytest.mark.parametrize("M,N", ODD)
def test_reverse_identity(rng, M, N):
    v = rng.standard_normal((M, N)) + 1j * rng.standard_normal((M, N))
    F = dft2_matrix(M, N)
    T = F.conj().T @ np.diag(v.ravel()) @ F
    kernel = idft2(v) / np.sqrt(M * N)
    assert np.max(np.abs(T - dense_bccb(kernel))) < 1e-10
    e0 = np.zeros(M * N)
    e0[0] = 1
    np.testing.assert_allclose(T @ e0, kernel.ravel(), atol=1e-12)
    u = rng.standard_normal((M, N))
    assert np.max(np.abs(circulant_apply(kernel, u).ravel() - T @ u.ravel())) < 1e-10


@pytest.mark.parametrize("M,N", ODD)
def test_regularizer_identity(rng, M, N):
    w = even_plane(rng, M, N)
    F = dft2_matrix(M, N)
    W2 = np.diag((w * w).ravel())
    R = dense_bccb(dft2(w).real / np.sqrt(M * N))
    assert np.max(np.abs(F.conj().T @ W2 @ F - R.T @ R)) < 1e-8
    assert np.max(np.abs(F @ W2 @ F.conj().T - R.T @ R)) < 1e-8


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (5, 3), elements=st.floats(-1e3, 1e3)))
def test_parseval_property(p):
    assert np.isclose(np.linalg.norm(dft2(p)), np.linalg.norm(p), rtol=1e-12, atol=1e-9)
    np.testing.assert_allclose(idft2(dft2(p)).real, p, atol=1e-9)
