"""Spatially regularized correlation filter tracking with circulant-structure solvers."""
from .config import TrackerConfig
from .features import FeatureMap, crop_patch, extract_features
from .regularizer import Regularizer, RegularizerSpec, build_regularizer, build_w, sparsify_spectrum
from .solver import (
    FilterModel,
    NumericalError,
    gauss_seidel,
    init_exact,
    make_target,
    sample_spectrum,
    update_model,
)
from .spectral import SparseBccb, bccb_from_kernel, circulant_apply, dft2, gram, idft2, reverse_perm
from .tracker import Detection, ScalePool, Tracker, TrackState, response_map, subgrid_refine

__version__ = "0.1.0"
