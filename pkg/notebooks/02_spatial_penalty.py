"""
The spatial penalty and its sparse spectrum
===========================================

The filter is penalized by a weight ``w`` that is small over the target and
grows quadratically towards the window border.  Because ``w`` is smooth, its
spectrum is concentrated on a handful of low frequencies; keeping those gives
a short convolution stencil whose size does not depend on the grid.
"""

import numpy as np

from fsrdcf.regularizer import RegularizerSpec, build_regularizer, build_w, sparsify_spectrum
from fsrdcf.spectral import dft2, idft2

spec = RegularizerSpec()  # mu=0.1, eta=3, beta=0.8, keep 99.9% of the spectral norm
print(spec)

###############################################################################
# The weight for a 49x49 grid with a target of about 12x12 cells.  The
# minimum sits at bin (0, 0), the sample center.

grid, target = (49, 49), (12.25, 12.25)
w = build_w(spec, grid, target)
print("w at center, one target-width away, at the corner:", w[0, 0], w[12, 0], w[24, 24])

###############################################################################
# How many Fourier coefficients are needed?

for keep in (0.9, 0.99, 0.999, 0.9999, 1.0):
    kernel, K = sparsify_spectrum(w, keep)
    err = np.linalg.norm(idft2(kernel).real - w) / np.linalg.norm(w)
    print(f"keep {keep:<7} -> {K:5d} coefficients, relative error in w {err:.1e}")

###############################################################################
# The operator used by the solver is the gram R^T R of the sparse stencil.
# Its size is the same on every grid.

for g in (25, 37, 49):
    reg = build_regularizer(spec, (g, g), (g / 4, g / 4))
    print(f"grid {g}x{g}: stencil {reg.K} taps, gram {reg.gram_op.K} taps")

###############################################################################
# With every coefficient kept, the gram is exactly the Fourier-side view of
# the pointwise penalty w^2.

small = build_regularizer(RegularizerSpec(sparsity_keep=1.0), (7, 7), (2, 2))
v = np.random.default_rng(1).standard_normal((7, 7))
lhs = small.gram_op.apply(dft2(v))
rhs = dft2(small.w**2 * v)
print("gram on spectra vs w^2 in space:", np.abs(lhs - rhs).max())
