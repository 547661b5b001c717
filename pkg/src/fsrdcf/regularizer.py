"""Spatial penalty construction and its sparse Fourier-domain operator."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .spectral import SparseBccb, bccb_from_kernel, dft2, gram


@dataclass(frozen=True)
class RegularizerSpec:
    """Parameters of ``w(m, n) = mu + eta (m / sigma_1)^2 + eta (n / sigma_2)^2``.

    ``sigma = beta * target_size``; ``sparsity_keep`` is the fraction of the
    spectrum's l2 norm retained when sparsifying.
    """

    mu: float = 0.1
    eta: float = 3.0
    beta: float = 0.8
    sparsity_keep: float = 0.999

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if self.eta < 0:
            raise ValueError("eta must be non-negative")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not 0 < self.sparsity_keep <= 1:
            raise ValueError("sparsity_keep must lie in (0, 1]")


@dataclass(frozen=True, eq=False)
class Regularizer:
    grid: tuple[int, int]
    w: np.ndarray
    kernel: np.ndarray  # sparsified real spectrum of w
    op: SparseBccb  # R, generated by kernel / sqrt(MN)
    gram_op: SparseBccb  # R^T R

    @property
    def K(self) -> int:
        return self.op.K

    def gram_matrix(self):
        """``R^T R`` as a CSR matrix (shared by every channel)."""
        return self.gram_op.to_sparse("csr")


def centered_coords(n: int) -> np.ndarray:
    """Coordinates ``-(n-1)/2 .. (n-1)/2`` rolled so that 0 sits at index 0."""
    return np.fft.ifftshift(np.arange(n) - (n - 1) // 2)


def build_w(spec: RegularizerSpec, grid, target) -> np.ndarray:
    """Quadratic spatial penalty with its minimum ``mu`` at bin (0, 0).

    ``target`` is the (rows, cols) target extent in feature cells.
    """
    M, N = grid
    if M % 2 == 0 or N % 2 == 0:
        raise ValueError(f"grid must be odd in both dimensions, got {M}x{N}")
    P, Q = target
    if P <= 0 or Q <= 0:
        raise ValueError("target size must be positive")
    m = centered_coords(M)[:, None] / (spec.beta * P)
    n = centered_coords(N)[None, :] / (spec.beta * Q)
    return spec.mu + spec.eta * m**2 + spec.eta * n**2


def sparsify_spectrum(w, keep: float):
    """Zero the weakest DFT coefficients of ``w``.

    Keeps the fewest largest-magnitude coefficients whose l2 norm reaches
    ``keep`` times the full norm (ties kept together so even symmetry
    survives), plus the DC bin.  Returns the real kernel and its support size.
    """
    if not 0 < keep <= 1:
        raise ValueError("keep must lie in (0, 1]")
    spec = dft2(w)
    imag = np.max(np.abs(spec.imag))
    scale = max(np.max(np.abs(spec)), 1e-300)
    if imag > 1e-10 * max(scale, 1.0):
        raise ValueError(f"w is not even-symmetric (spectrum imaginary part {imag:.3g})")
    spec = spec.real
    mag = np.abs(spec)
    nonzero = mag > 1e-12 * scale
    if keep >= 1:
        mask = nonzero
    else:
        ordered = np.sort(mag[nonzero])[::-1]
        energy = np.cumsum(ordered**2)
        n = int(np.searchsorted(energy, keep**2 * energy[-1]))
        threshold = ordered[min(n, len(ordered) - 1)]
        mask = nonzero & (mag >= threshold)
    mask[0, 0] = True
    kernel = np.where(mask, spec, 0.0)
    return kernel, int(mask.sum())


def build_regularizer(spec: RegularizerSpec, grid, target) -> Regularizer:
    w = build_w(spec, grid, target)
    kernel, _ = sparsify_spectrum(w, spec.sparsity_keep)
    M, N = grid
    # w >= mu > 0 keeps the DC bin nonzero
    op = bccb_from_kernel(kernel / np.sqrt(M * N))
    return Regularizer(grid=(M, N), w=w, kernel=kernel, op=op, gram_op=gram(op))


def system_matrix(reg: Regularizer, data_diag) -> sp.csr_matrix:
    """``diag(data_diag) + R^T R`` for one channel, row-major ordering."""
    G = reg.gram_matrix()
    return (G + sp.diags(np.ravel(data_diag))).tocsr()
