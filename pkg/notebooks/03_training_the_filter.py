"""
Training: one exact solve, then a few sweeps per frame
======================================================

Per feature channel the filter spectrum solves a sparse symmetric positive
definite system ``(diag(|x|^2) + R^T R) f = conj(x) * y``.  The first frame is
solved directly; later frames update the data terms and warm-start a few
Gauss-Seidel sweeps from the previous filter.
"""

import time

import numpy as np

from scipy.sparse.linalg import spsolve

from fsrdcf.regularizer import RegularizerSpec, build_regularizer, system_matrix
from fsrdcf.solver import FilterModel, gauss_seidel, make_target, sample_spectrum, update_model
from fsrdcf.spectral import idft2

rng = np.random.default_rng(2)
grid, target = (49, 49), (12.25, 12.25)
reg = build_regularizer(RegularizerSpec(), grid, target)
y, y_perm = make_target(grid, target)

###############################################################################
# A 32-channel first frame, solved exactly.

x = rng.standard_normal((32,) + grid)
t0 = time.perf_counter()
model = FilterModel.first_frame(sample_spectrum(x), reg, y_perm, gamma=0.025)
print(f"exact solve of 32 channels on {grid}: {time.perf_counter() - t0:.2f} s")
print("relative residual per channel (max):", model.residual().max())

###############################################################################
# The learned filter is real in space.

f = idft2(np.conj(model.filters[0]))
print("imaginary part of the spatial filter:", np.abs(f.imag).max())

###############################################################################
# Online updates: the sample drifts slowly, and four sweeps per frame keep
# the filter close to the exact solution of the current system.

for frame in range(1, 6):
    x = x + 0.1 * rng.standard_normal(x.shape)
    update_model(model, sample_spectrum(x))
    before = model.residual().max()
    gauss_seidel(model)
    # direct solve of the current averaged system, channel 0, for reference
    exact = spsolve(system_matrix(reg, model.data_diag[0]).tocsc(), model.rhs()[0].ravel())
    gap = np.linalg.norm(model.filters[0].ravel() - exact) / np.linalg.norm(exact)
    print(f"frame {frame}: residual {before:.1e} -> {model.residual().max():.1e}, distance to exact {gap:.1e}")
