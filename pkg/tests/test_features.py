import numpy as np
import pytest

from fsrdcf.features import (
    cell_grid,
    crop_patch,
    extract_features,
    gradient_histogram,
    hann2d,
    hog_feature,
    to_gray,
)
from oracles import bilinear_sample, orientation_histogram


def ramp(H=40, W=50):
    return np.add.outer(np.arange(H) * 0.01, np.arange(W) * 0.001)


class TestGray:
    def test_uint8_scaled(self):
        img = np.full((3, 3, 3), 255, np.uint8)
        np.testing.assert_allclose(to_gray(img), 1.0)

    def test_luma(self):
        img = np.zeros((1, 1, 3))
        img[..., 1] = 1.0
        assert to_gray(img)[0, 0] == pytest.approx(0.587)

    def test_empty(self):
        with pytest.raises(ValueError):
            to_gray(np.zeros((0, 3)))


class TestCrop:
    def test_inside_at_unit_scale_is_a_slice(self):
        img = ramp()
        patch = crop_patch(img, center=(20.0, 15.0), window_size=(9, 7))
        np.testing.assert_allclose(patch, img[12:19, 16:25], atol=1e-12)

    def test_corner_replicates_border(self):
        img = ramp()
        patch = crop_patch(img, center=(0.0, 0.0), window_size=(11, 11))
        np.testing.assert_allclose(patch[:6, :6], img[0, 0], atol=1e-12)
        np.testing.assert_allclose(patch[5, 5:], img[0, :6], atol=1e-12)

    def test_scaled_checkerboard_matches_bilinear_oracle(self):
        img = (np.indices((24, 24)).sum(axis=0) % 2).astype(float)
        center, size, scale = (11.3, 12.6), (10, 8), 2.0
        patch = crop_patch(img, center, size, scale)
        xs = center[0] + (np.arange(size[0]) - (size[0] - 1) / 2) * scale
        ys = center[1] + (np.arange(size[1]) - (size[1] - 1) / 2) * scale
        np.testing.assert_allclose(patch, bilinear_sample(img, ys, xs), atol=1e-12)

    def test_fractional_scale_matches_oracle(self, rng):
        img = rng.random((30, 30))
        patch = crop_patch(img, (14.0, 16.5), (13, 13), 1.37)
        xs = 14.0 + (np.arange(13) - 6) * 1.37
        ys = 16.5 + (np.arange(13) - 6) * 1.37
        np.testing.assert_allclose(patch, bilinear_sample(img, ys, xs), atol=1e-12)

    @pytest.mark.parametrize("size,scale", [((0, 5), 1.0), ((5, 5), 0.0)])
    def test_degenerate(self, size, scale):
        with pytest.raises(ValueError):
            crop_patch(ramp(), (5, 5), size, scale)


class TestGrid:
    @pytest.mark.parametrize("window,cell,expected", [(100, 4, 25), (104, 4, 25), (108, 4, 27), (4, 4, 1)])
    def test_odd(self, window, cell, expected):
        assert cell_grid(window, cell) == expected

    def test_too_small(self):
        with pytest.raises(ValueError):
            cell_grid(3, 4)


class TestHistogram:
    def test_matches_pixel_loop(self, rng):
        patch = rng.random((16, 20))
        hist = gradient_histogram(patch, 4)
        np.testing.assert_allclose(hist.sum(axis=(1, 2)), orientation_histogram(patch), atol=1e-10)

    def test_vertical_edge(self):
        patch = np.zeros((12, 12))
        patch[:, 6:] = 1.0
        hist = gradient_histogram(patch, 4).sum(axis=(1, 2))
        assert np.argmax(hist) == np.argmax(orientation_histogram(patch)) == 0

    def test_horizontal_edge(self):
        patch = np.zeros((12, 12))
        patch[6:, :] = 1.0
        assert np.argmax(gradient_histogram(patch, 4).sum(axis=(1, 2))) == 18 // 4


class TestFeatures:
    def test_constant_patch_gives_zero(self):
        fm = extract_features(np.full((40, 40), 0.7), 4, "hog")
        assert fm.channels == 32 and fm.grid == (9, 9)
        assert np.max(np.abs(fm.planes)) < 1e-12

    def test_hog_bounds(self, rng):
        h = hog_feature(rng.random((40, 40)), 4)
        assert h.shape == (31, 10, 10)
        assert h.min() >= 0
        assert h[:27].max() <= 2 * 0.2 + 1e-12

    def test_gray_is_zero_mean_without_window(self, rng):
        fm = extract_features(rng.random((36, 28)), 4, "gray", window=False)
        assert fm.grid == (9, 7)
        assert abs(fm.planes.mean()) < 1e-12

    def test_center_lands_on_origin(self):
        patch = np.zeros((36, 36))
        patch[16:20, 16:20] = 1.0
        fm = extract_features(patch, 4, "gray", window=False)
        assert np.unravel_index(np.argmax(fm.planes[0]), fm.grid) == (0, 0)

    def test_window_peaks_at_origin(self):
        fm = extract_features(np.ones((44, 44)) + np.eye(44), 4, "gray", window=True)
        w = np.fft.ifftshift(hann2d(*fm.grid))
        assert np.unravel_index(np.argmax(w), w.shape) == (0, 0)

    def test_shift_covariance(self, rng):
        img = rng.random((80, 80))
        a = extract_features(crop_patch(img, (40.0, 40.0), (36, 36)), 4, "hog", window=False).planes
        b = extract_features(crop_patch(img, (44.0, 40.0), (36, 36)), 4, "hog", window=False).planes
        a = np.fft.fftshift(a, axes=(1, 2))
        b = np.fft.fftshift(b, axes=(1, 2))
        # one cell to the right; compare interior cells away from the block-normalization border
        np.testing.assert_allclose(b[1:, 2:-2, 2:-3], a[1:, 2:-2, 3:-2], atol=1e-12)

    def test_deterministic(self, rng):
        p = rng.random((40, 40))
        np.testing.assert_array_equal(extract_features(p).planes, extract_features(p).planes)

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            extract_features(np.zeros((8, 8)), 4, "sift")

    def test_too_small(self):
        with pytest.raises(ValueError):
            extract_features(np.zeros((3, 8)), 4)
