"""
Circulant structure in two dimensions
=====================================

A block-circulant matrix with circulant blocks is defined by one plane, its
kernel.  The unitary 2D DFT turns it into a diagonal matrix, so applying it
costs two FFTs instead of a dense product.  This script builds small dense
matrices by brute force and compares them with the FFT shortcuts in
``fsrdcf.spectral``.
"""

import numpy as np

from fsrdcf.spectral import bccb_from_kernel, circulant_apply, dft2, gram, idft2, reverse_perm

rng = np.random.default_rng(0)
M, N = 5, 7

###############################################################################
# A dense BCCB matrix by enumeration: C[i, j] = k[i - j] on the torus.

k = rng.standard_normal((M, N))
C = np.zeros((M * N, M * N))
for i in range(M * N):
    for j in range(M * N):
        C[i, j] = k[(i // N - j // N) % M, (i % N - j % N) % N]

v = rng.standard_normal((M, N))
print("dense vs FFT product:", np.abs(C @ v.ravel() - circulant_apply(k, v).ravel()).max())

###############################################################################
# The DFT matrix, built from its definition, diagonalizes C.  Note the
# sqrt(MN) factor that the unitary normalization puts in front of the kernel
# spectrum.

F = np.kron(np.exp(-2j * np.pi * np.outer(np.arange(M), np.arange(M)) / M) / np.sqrt(M),
            np.exp(-2j * np.pi * np.outer(np.arange(N), np.arange(N)) / N) / np.sqrt(N))
D = F @ C @ F.conj().T
off = D - np.diag(np.diag(D))
print("largest off-diagonal entry after the transform:", np.abs(off).max())
print("diagonal equals sqrt(MN) * dft2(k):", np.abs(np.diag(D) - np.sqrt(M * N) * dft2(k).ravel()).max())

###############################################################################
# Applying the DFT twice gives the index reversal k -> -k.  On spectra of real
# signals this is the same as complex conjugation.

spec = dft2(v)
print("reversal equals conjugation:", np.abs(reverse_perm(spec) - spec.conj()).max())

###############################################################################
# Sparse kernels stay sparse: the product R^T R of a sparse BCCB operator is
# again BCCB, with the autocorrelation of the stencil as kernel.

sparse = np.where(rng.random((M, N)) < 0.2, k, 0.0)
op = bccb_from_kernel(sparse)
g = gram(op)
print(f"stencil of {op.K} taps -> gram stencil of {g.K} taps")
R = op.to_sparse().toarray()
print("gram vs dense R^T R:", np.abs(g.to_sparse().toarray() - R.T @ R).max())
print("round trip idft2(dft2(v)):", np.abs(idft2(dft2(v)) - v).max())
