"""Unitary 2D DFT helpers and block-circulant (BCCB) operator algebra.

All transforms act on the last two axes, so a ``(d, M, N)`` channel stack is
handled exactly like a single ``(M, N)`` plane.  A BCCB matrix is identified
with its generating kernel ``k``: ``C[i, j] = k[i - j]`` under modular
row-major indexing, so ``C @ vec(v)`` is the circular convolution ``k * v``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

_AXES = (-2, -1)


def dft2(p):
    """Unitary 2D DFT over the last two axes."""
    return np.fft.fft2(p, axes=_AXES, norm="ortho")


def idft2(p):
    """Inverse of :func:`dft2` (also unitary)."""
    return np.fft.ifft2(p, axes=_AXES, norm="ortho")


def reverse_perm(p):
    """Index reversal ``out[k, l] = p[-k mod M, -l mod N]``.

    This is the permutation produced by applying the 2D DFT twice.  On the
    spectrum of a real plane it coincides with complex conjugation.
    """
    p = np.asarray(p)
    return np.roll(np.flip(p, axis=_AXES), 1, axis=_AXES)


def is_hermitian(p, tol=1e-10):
    """True when ``p`` is the spectrum of a real plane, up to ``tol``."""
    p = np.asarray(p)
    scale = max(float(np.max(np.abs(p), initial=0.0)), 1.0)
    return bool(np.max(np.abs(reverse_perm(p) - np.conj(p)), initial=0.0) <= tol * scale)


def hermitian_part(p):
    """Orthogonal projection onto spectra of real planes."""
    return 0.5 * (p + np.conj(reverse_perm(p)))


def circulant_apply(kernel, v):
    """Multiply ``v`` by the BCCB matrix generated by ``kernel``.

    Computed through FFT diagonalization; ``kernel`` broadcasts against any
    leading axes of ``v``.
    """
    kernel = np.asarray(kernel)
    v = np.asarray(v)
    if kernel.shape[-2:] != v.shape[-2:]:
        raise ValueError(f"grid mismatch: kernel {kernel.shape[-2:]} vs plane {v.shape[-2:]}")
    M, N = v.shape[-2:]
    out = np.sqrt(M * N) * idft2(dft2(kernel) * dft2(v))
    if not (np.iscomplexobj(kernel) or np.iscomplexobj(v)):
        out = out.real
    return out


@dataclass(frozen=True)
class SparseBccb:
    """BCCB operator stored as a sparse stencil of its generating kernel.

    ``offsets`` is a ``(K, 2)`` integer array of (row, col) offsets reduced
    modulo the grid, ``values`` the matching kernel entries.
    """

    shape: tuple[int, int]
    offsets: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        offsets = np.asarray(self.offsets, dtype=np.intp).reshape(-1, 2)
        values = np.asarray(self.values).reshape(-1)
        if len(offsets) != len(values):
            raise ValueError("offsets and values differ in length")
        offsets = offsets % np.asarray(self.shape)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "shape", (int(self.shape[0]), int(self.shape[1])))

    @property
    def K(self) -> int:
        return len(self.values)

    @classmethod
    def identity(cls, shape, value=1.0):
        return cls(shape, np.zeros((1, 2), dtype=np.intp), np.array([value]))

    def kernel(self):
        k = np.zeros(self.shape, dtype=self.values.dtype)
        np.add.at(k, (self.offsets[:, 0], self.offsets[:, 1]), self.values)
        return k

    def apply(self, v):
        """Circular convolution of the stencil with ``v`` (last two axes)."""
        v = np.asarray(v)
        if v.shape[-2:] != self.shape:
            raise ValueError(f"grid mismatch: operator {self.shape} vs plane {v.shape[-2:]}")
        out = np.zeros(np.broadcast_shapes(v.shape, ()), dtype=np.result_type(v, self.values))
        for (r, c), val in zip(self.offsets, self.values):
            out += val * np.roll(v, (r, c), axis=_AXES)
        return out

    def diagonal_value(self):
        hit = np.all(self.offsets == 0, axis=1)
        return self.values[hit].sum() if hit.any() else self.values.dtype.type(0)

    def to_sparse(self, format="csr"):
        """Explicit ``MN x MN`` sparse matrix, row-major vectorization."""
        M, N = self.shape
        rows = np.arange(M * N)
        i, j = np.divmod(rows, N)
        data, indices, indptr_rows = [], [], []
        for (r, c), val in zip(self.offsets, self.values):
            cols = ((i - r) % M) * N + (j - c) % N
            data.append(np.full(M * N, val))
            indices.append(cols)
            indptr_rows.append(rows)
        mat = sp.coo_matrix(
            (np.concatenate(data), (np.concatenate(indptr_rows), np.concatenate(indices))),
            shape=(M * N, M * N),
        )
        return mat.asformat(format)


def bccb_from_kernel(kernel, drop_below=0.0) -> SparseBccb:
    """Stencil of the entries of ``kernel`` with magnitude above ``drop_below``."""
    if drop_below < 0:
        raise ValueError("drop_below must be non-negative")
    kernel = np.asarray(kernel)
    r, c = np.nonzero(np.abs(kernel) > drop_below)
    return SparseBccb(kernel.shape, np.stack([r, c], axis=1), kernel[r, c])


def gram(op: SparseBccb) -> SparseBccb:
    """Stencil of ``op^H op`` (the kernel autocorrelation)."""
    M, N = op.shape
    diff = (op.offsets[None, :, :] - op.offsets[:, None, :]) % np.array([M, N])
    prod = np.conj(op.values)[:, None] * op.values[None, :]
    acc = np.zeros(op.shape, dtype=prod.dtype)
    np.add.at(acc, (diff[..., 0].ravel(), diff[..., 1].ravel()), prod.ravel())
    r, c = np.nonzero(acc)
    return SparseBccb(op.shape, np.stack([r, c], axis=1), acc[r, c])
