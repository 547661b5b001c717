"""Per-channel normal equations in the Fourier domain.

Each channel ``l`` solves the real sparse system

    (diag(D_l) + R^T R) f_l = d_l * P(y_hat)

where ``D_l`` is the running power spectrum of the samples, ``d_l`` the running
conjugate spectrum, ``R^T R`` the regularizer gram operator and ``P(y_hat)``
the index-reversed label spectrum.  The unknown ``f_l`` is the filter in the
form used directly for detection (no reverse permutation needed there).

Sample spectra are the un-normalized DFT (``sqrt(MN) * dft2``) of the
feature planes, while labels and filters use the unitary DFT.  With that
pairing the system is exactly the ridge regression over all circular shifts
with penalty ``||w * f||^2``, and ``idft2(sum_l z_hat_l * f_l)`` is exactly
the spatial correlation score.
"""
from __future__ import annotations

import logging
import weakref
from dataclasses import dataclass

import numba
import numpy as np
import scipy.sparse as sp
import scipy.linalg as sla_dense
import scipy.sparse.linalg as sla
from scipy.sparse.csgraph import reverse_cuthill_mckee

from .regularizer import Regularizer
from .spectral import dft2, hermitian_part, is_hermitian, reverse_perm

log = logging.getLogger(__name__)


class NumericalError(RuntimeError):
    """Raised when a factorization or sweep meets a corrupt system."""


def sample_spectrum(x):
    """Un-normalized 2D DFT of a (d, M, N) feature stack."""
    return np.fft.fft2(x, axes=(-2, -1))


def make_target(grid, target_size, sigma_factor=1.0 / 16):
    """Gaussian label centered at bin (0, 0) and its reversed spectrum.

    ``sigma = sigma_factor * sqrt(P * Q)`` with ``target_size = (P, Q)`` in
    feature cells.
    """
    M, N = grid
    if M % 2 == 0 or N % 2 == 0:
        raise ValueError(f"grid must be odd, got {M}x{N}")
    sigma = sigma_factor * np.sqrt(target_size[0] * target_size[1])
    m = np.fft.ifftshift(np.arange(M) - (M - 1) // 2)[:, None]
    n = np.fft.ifftshift(np.arange(N) - (N - 1) // 2)[None, :]
    if sigma <= 0:
        y = ((m == 0) & (n == 0)).astype(float)
    else:
        y = np.exp(-0.5 * (m**2 + n**2) / sigma**2)
    return y, reverse_perm(dft2(y))


def _rhs(rhs_acc, target_perm):
    return rhs_acc * target_perm


class _ParityFactor:
    """Banded Cholesky solver for ``diag(D) + R^T R`` with index-symmetric ``D``.

    Such a matrix commutes with the index reversal, so it splits into blocks
    acting on reversal-even and reversal-odd planes.  Each block is reordered
    by reverse Cuthill-McKee, which leaves a narrow band for the regularizer
    stencils met in practice.
    """

    def __init__(self, reg: Regularizer):
        M, N = reg.grid
        idx = np.arange(M * N)
        rev = reverse_perm(idx.reshape(M, N)).ravel()
        self.fixed = idx[idx == rev]
        self.pairs = idx[idx < rev]
        self.partner = rev[self.pairs]
        G = reg.gram_matrix().tocsr()
        h = 1 / np.sqrt(2)
        npair, nfix = len(self.pairs), len(self.fixed)
        even = sp.csr_matrix(
            (
                np.concatenate([np.ones(nfix), np.full(2 * npair, h)]),
                (np.concatenate([self.fixed, self.pairs, self.partner]),
                 np.concatenate([np.arange(nfix), nfix + np.arange(npair), nfix + np.arange(npair)])),
            ),
            shape=(M * N, nfix + npair),
        )
        odd = sp.csr_matrix(
            (
                np.concatenate([np.full(npair, h), np.full(npair, -h)]),
                (np.concatenate([self.pairs, self.partner]), np.concatenate([np.arange(npair)] * 2)),
            ),
            shape=(M * N, npair),
        )
        self.blocks = [self._band(even.T @ G @ even), self._band(odd.T @ G @ odd)]

    @staticmethod
    def _band(B):
        B = B.tocsr()
        perm = reverse_cuthill_mckee(B, symmetric_mode=True)
        Bp = B[perm][:, perm].tocoo()
        lower = Bp.row >= Bp.col
        r, c, v = Bp.row[lower], Bp.col[lower], Bp.data[lower]
        bw = int(np.max(r - c, initial=0))
        band = np.zeros((bw + 1, B.shape[0]))
        np.add.at(band, (r - c, c), v)
        return perm, band

    def split(self, v):
        h = 1 / np.sqrt(2)
        a, b = v[self.pairs], v[self.partner]
        return np.concatenate([v[self.fixed], h * (a + b)]), h * (a - b)

    def merge(self, even, odd, n):
        h = 1 / np.sqrt(2)
        out = np.empty(n, dtype=np.result_type(even, odd))
        nfix = len(self.fixed)
        out[self.fixed] = even[:nfix]
        out[self.pairs] = h * (even[nfix:] + odd)
        out[self.partner] = h * (even[nfix:] - odd)
        return out

    def solve(self, data_diag, b):
        """Solve one channel; ``data_diag`` and ``b`` are flat."""
        # index-symmetric diagonal stays diagonal in the parity bases
        d_odd = data_diag[self.pairs]
        d_even = np.concatenate([data_diag[self.fixed], d_odd])
        parts = []
        for (perm, band), dpart, bpart in zip(self.blocks, (d_even, d_odd), self.split(b)):
            if len(perm) == 0:
                parts.append(bpart)
                continue
            ab = band.copy()
            ab[0] += dpart[perm]
            try:
                cb = sla_dense.cholesky_banded(ab, lower=True)
            except np.linalg.LinAlgError as err:
                raise NumericalError(f"system matrix is not positive definite ({err})") from None
            rhs = np.stack([bpart[perm].real, bpart[perm].imag], axis=1)
            sol = sla_dense.cho_solve_banded((cb, True), rhs)
            x = np.empty(len(perm), dtype=complex)
            x[perm] = sol[:, 0] + 1j * sol[:, 1]
            parts.append(x)
        return self.merge(parts[0], parts[1], len(b))


_FACTORS: "weakref.WeakKeyDictionary[Regularizer, _ParityFactor]" = weakref.WeakKeyDictionary()


def _parity_factor(reg):
    if reg not in _FACTORS:
        _FACTORS[reg] = _ParityFactor(reg)
    return _FACTORS[reg]


def init_exact(x_hat, reg: Regularizer, y_hat_perm):
    """Direct solve of the first-frame system for every channel.

    Uses a banded Cholesky factorization on the symmetric and antisymmetric
    halves when the sample power spectrum is index-symmetric (any real
    sample), and a general sparse LU otherwise.
    """
    x_hat = np.asarray(x_hat)
    if x_hat.ndim == 2:
        x_hat = x_hat[None]
    d, M, N = x_hat.shape
    if (M, N) != reg.grid:
        raise ValueError(f"sample grid {(M, N)} does not match regularizer {reg.grid}")
    data_diag = (np.conj(x_hat) * x_hat).real
    b = _rhs(np.conj(x_hat), y_hat_perm)
    out = np.empty_like(b)
    symmetric = np.allclose(reverse_perm(data_diag), data_diag, rtol=1e-12, atol=0)
    if symmetric:
        factor = _parity_factor(reg)
        for l in range(d):
            out[l] = factor.solve(data_diag[l].ravel(), b[l].ravel()).reshape(M, N)
    else:
        G = reg.gram_matrix()
        for l in range(d):
            A = (G + sp.diags(data_diag[l].ravel())).tocsc()
            rhs = np.stack([b[l].real.ravel(), b[l].imag.ravel()], axis=1)
            try:
                sol = sla.splu(A).solve(rhs)
            except RuntimeError as err:
                log.warning("factorization failed on channel %d (%s); falling back to sweeps", l, err)
                sol = _fallback_solve(A, rhs)
            out[l] = (sol[:, 0] + 1j * sol[:, 1]).reshape(M, N)
    if not np.all(np.isfinite(out)):
        raise NumericalError("non-finite filter after first-frame solve")
    return out


def _fallback_solve(A, rhs, sweeps=100, tol=1e-6):
    A = A.tocsr()
    diag = A.diagonal()
    if np.any(diag == 0):
        raise NumericalError("zero diagonal entry in system matrix")
    off = (A - sp.diags(diag)).tocsr()
    x = np.zeros_like(rhs)
    for col in range(rhs.shape[1]):
        xc = x[:, col]
        _sweeps_real(off.indptr, off.indices, off.data, diag, rhs[:, col], xc, sweeps)
    res = np.linalg.norm(A @ x - rhs) / max(np.linalg.norm(rhs), 1e-300)
    if res > tol:
        raise NumericalError(f"fallback solve did not converge (relative residual {res:.3g})")
    return x


@numba.njit(cache=True)
def _sweeps_real(indptr, indices, data, diag, b, x, n_sweeps):
    n = len(b)
    for _ in range(n_sweeps):
        for i in range(n):
            s = b[i]
            for p in range(indptr[i], indptr[i + 1]):
                s -= data[p] * x[indices[p]]
            x[i] = s / diag[i]


@numba.njit(cache=True)
def _gs_row(i, indptr, indices, data, g0, data_diag, b, f, acc):
    d = f.shape[1]
    for l in range(d):
        acc[l] = b[i, l]
    for p in range(indptr[i], indptr[i + 1]):
        j = indices[p]
        a = data[p]
        for l in range(d):
            acc[l] -= a * f[j, l]
    for l in range(d):
        f[i, l] = acc[l] / (data_diag[i, l] + g0)


@numba.njit(cache=True)
def _gs_channels(indptr, indices, data, g0, data_diag, b, f, n_sweeps, symmetric):
    # rows index unknowns, columns channels: f, b (n, d) complex, data_diag (n, d)
    n, d = f.shape
    acc = np.empty(d, dtype=f.dtype)
    for _ in range(n_sweeps):
        for i in range(n):
            _gs_row(i, indptr, indices, data, g0, data_diag, b, f, acc)
        if symmetric:
            for i in range(n - 1, -1, -1):
                _gs_row(i, indptr, indices, data, g0, data_diag, b, f, acc)


@dataclass
class FilterModel:
    """Running normal-equation state and current filters.

    ``data_diag`` (d, M, N) real and ``rhs_acc`` (d, M, N) complex are the
    exponentially averaged ``x_hat^* x_hat`` and ``x_hat^*``; the system
    right-hand side is ``rhs_acc * target_perm``.
    """

    reg: Regularizer
    target_perm: np.ndarray
    data_diag: np.ndarray
    rhs_acc: np.ndarray
    filters: np.ndarray
    gamma: float = 0.025
    gs_sweeps: int = 4
    symmetric: bool = False

    def __post_init__(self):
        if not 0 <= self.gamma <= 1:
            raise ValueError("gamma must lie in [0, 1]")
        if self.gs_sweeps < 1:
            raise ValueError("gs_sweeps must be positive")
        G = self.reg.gram_matrix().tocsr()
        g0 = G.diagonal()
        if not np.allclose(g0, g0[0]):
            raise ValueError("gram operator must have a constant diagonal")
        off = (G - sp.diags(g0)).tocsr()
        off.eliminate_zeros()
        self._off = off
        self._g0 = float(g0[0].real)

    @classmethod
    def first_frame(cls, x_hat, reg, target_perm, **kw):
        x_hat = np.asarray(x_hat)
        if x_hat.ndim == 2:
            x_hat = x_hat[None]
        filters = init_exact(x_hat, reg, target_perm)
        return cls(
            reg=reg,
            target_perm=target_perm,
            data_diag=(np.conj(x_hat) * x_hat).real,
            rhs_acc=np.conj(x_hat),
            filters=filters,
            **kw,
        )

    @property
    def channels(self) -> int:
        return self.filters.shape[0]

    def rhs(self):
        return _rhs(self.rhs_acc, self.target_perm)

    def apply_system(self, f):
        """``A_l f_l`` for every channel."""
        d, M, N = f.shape
        flat = f.reshape(d, M * N)
        gf = (self._off @ flat.T).T
        gf = gf + (self._g0 + self.data_diag.reshape(d, -1)) * flat
        return gf.reshape(d, M, N)

    def residual(self, f=None):
        """Per-channel relative residual ``||A f - b|| / ||b||``."""
        f = self.filters if f is None else f
        b = self.rhs()
        r = self.apply_system(f) - b
        num = np.linalg.norm(r.reshape(len(r), -1), axis=1)
        den = np.linalg.norm(b.reshape(len(b), -1), axis=1)
        return num / np.where(den > 0, den, 1.0)


def update_model(model: FilterModel, x_hat_new) -> FilterModel:
    """Exponential update of the data statistics, in place."""
    x_hat_new = np.asarray(x_hat_new)
    if x_hat_new.ndim == 2:
        x_hat_new = x_hat_new[None]
    if x_hat_new.shape != model.filters.shape:
        raise ValueError(f"sample shape {x_hat_new.shape} does not match model {model.filters.shape}")
    g = model.gamma
    model.data_diag = (1 - g) * model.data_diag + g * (np.conj(x_hat_new) * x_hat_new).real
    model.rhs_acc = (1 - g) * model.rhs_acc + g * np.conj(x_hat_new)
    return model


def gauss_seidel(model: FilterModel, sweeps: int | None = None):
    """Warm-started Gauss-Seidel sweeps on every channel; updates ``model.filters``.

    The real system matrix is applied to the complex unknown, so real and
    imaginary parts sweep together.  When the right-hand side is the spectrum
    of a real signal the iterate is projected back onto that subspace after
    the sweeps, since the row-major order does not commute with the index
    reversal.
    """
    sweeps = model.gs_sweeps if sweeps is None else sweeps
    if model._g0 + model.data_diag.min() <= 0:
        raise NumericalError("non-positive diagonal in system matrix")
    d, M, N = model.filters.shape
    b = model.rhs()
    f = np.ascontiguousarray(model.filters.reshape(d, M * N).T, dtype=np.complex128)
    off = model._off
    _gs_channels(
        off.indptr, off.indices, off.data.real.astype(np.float64), model._g0,
        np.ascontiguousarray(model.data_diag.reshape(d, M * N).T),
        np.ascontiguousarray(b.reshape(d, M * N).T, dtype=np.complex128),
        f, sweeps, model.symmetric,
    )
    f = np.ascontiguousarray(f.T).reshape(d, M, N)
    if is_hermitian(b):
        f = hermitian_part(f)
    if not np.all(np.isfinite(f)):
        raise NumericalError("non-finite filter after Gauss-Seidel sweeps")
    model.filters = f
    return f
