import numpy as np
import pytest

from fsrdcf.config import TrackerConfig
from fsrdcf.solver import sample_spectrum
from fsrdcf.spectral import dft2
from fsrdcf.synth import make_sequence
from fsrdcf.tracker import ScalePool, Tracker, interp_value, response_map, subgrid_refine, wrap_bin
from oracles import circular_correlation


@pytest.fixture(scope="module")
def static_seq():
    return make_sequence("static", frames=12, seed=3)


def centers(boxes):
    b = np.asarray(boxes, float)
    return b[:, :2] + b[:, 2:] / 2


class TestScalePool:
    def test_factors(self):
        pool = ScalePool(5, 1.02)
        np.testing.assert_array_equal(pool.exponents, [-2, -1, 0, 1, 2])
        np.testing.assert_allclose(pool.factors, 1.02 ** np.arange(-2, 3))

    def test_single(self):
        np.testing.assert_array_equal(ScalePool(1, 1.01).factors, [1.0])

    @pytest.mark.parametrize("n", [0, 4])
    def test_invalid(self, n):
        with pytest.raises(ValueError):
            ScalePool(n)


class TestResponse:
    def test_matches_spatial_correlation(self, rng):
        x = rng.standard_normal((3, 7, 9))
        f = rng.standard_normal((3, 7, 9))
        # filter in detection form is the conjugate unitary spectrum of the spatial filter
        resp = response_map(np.conj(dft2(f)), sample_spectrum(x))
        np.testing.assert_allclose(resp, circular_correlation(x, f), atol=1e-10)

    def test_self_peak_and_shift(self, rng):
        x = rng.standard_normal((2, 15, 15))
        filt = np.conj(dft2(x))
        assert np.unravel_index(np.argmax(response_map(filt, sample_spectrum(x))), (15, 15)) == (0, 0)
        shifted = np.roll(x, (3, 5), axis=(1, 2))
        assert np.unravel_index(np.argmax(response_map(filt, sample_spectrum(shifted))), (15, 15)) == (3, 5)

    def test_rejects_complex_residue(self, rng):
        z = rng.standard_normal((1, 5, 5)) + 1j * rng.standard_normal((1, 5, 5))
        with pytest.raises(ArithmeticError):
            response_map(np.ones((1, 5, 5)), z)

    def test_wrap_bin(self):
        assert [wrap_bin(k, 7) for k in range(7)] == [0, 1, 2, 3, -3, -2, -1]


class TestSubgrid:
    def test_recovers_cosine_peak(self):
        M, N = 15, 17
        m = np.arange(M)[:, None]
        n = np.arange(N)[None, :]
        r = np.cos(2 * np.pi * (m - 0.3) / M) + np.cos(2 * np.pi * (n + 0.2) / N)
        dx, dy, value = subgrid_refine(dft2(r), (0, 0), 10)
        assert dx == pytest.approx(-0.2, abs=1e-8)
        assert dy == pytest.approx(0.3, abs=1e-8)
        assert value == pytest.approx(2.0, abs=1e-8)

    def test_interp_reproduces_samples(self, rng):
        r = rng.standard_normal((7, 9))
        spec = dft2(r)
        for u, v in [(0, 0), (3, 4), (6, 8)]:
            assert interp_value(spec, u, v) == pytest.approx(r[u, v], abs=1e-10)

    def test_symmetric_peak_stays(self):
        m = np.fft.fftfreq(11) * 11
        r = np.exp(-0.5 * (m[:, None] ** 2 + m[None, :] ** 2) / 1.5**2)
        dx, dy, _ = subgrid_refine(dft2(r), (0, 0))
        assert abs(dx) < 1e-9 and abs(dy) < 1e-9

    def test_never_below_integer_peak(self, rng):
        for _ in range(10):
            r = rng.standard_normal((9, 9))
            peak = np.unravel_index(np.argmax(r), r.shape)
            dx, dy, value = subgrid_refine(dft2(r), peak)
            assert value >= r[peak] - 1e-12
            assert abs(dx) <= 1 and abs(dy) <= 1


class TestTracker:
    def test_first_box_is_input(self, static_seq):
        images, boxes = static_seq
        t = Tracker()
        t.init(images[0], boxes[0])
        assert t.bbox() == tuple(boxes[0])

    def test_geometry(self, static_seq):
        images, boxes = static_seq
        t = Tracker()
        t.init(images[0], boxes[0])
        M, N = t.grid
        assert M % 2 == 1 and N % 2 == 1 and np.sqrt(M * N) <= 50
        assert t.model.channels == 32

    def test_init_deterministic(self, static_seq):
        images, boxes = static_seq
        a, b = Tracker(), Tracker()
        a.init(images[0], boxes[0])
        b.init(images[0], boxes[0])
        np.testing.assert_array_equal(a.model.filters, b.model.filters)

    def test_static_target_does_not_drift(self, static_seq):
        images, boxes = static_seq
        t = Tracker()
        t.init(images[0], boxes[0])
        out = [t.step(img)[0] for img in images[1:]]
        err = np.hypot(*(centers(out) - centers(boxes[1:])).T)
        assert err.max() < 1.0
        assert abs(out[-1][2] - boxes[-1][2]) < 1.0

    def test_single_scale(self, static_seq):
        images, boxes = static_seq
        t = Tracker(TrackerConfig(n_scales=1))
        t.init(images[0], boxes[0])
        for img in images[1:4]:
            box, det, _ = t.step(img)
            assert det.scale_index == 0
            assert box[2] == pytest.approx(boxes[0][2])

    def test_skipped_frame_keeps_box(self, static_seq):
        images, boxes = static_seq
        t = Tracker()
        t.init(images[0], boxes[0])
        before = t.step(images[1])[0]
        after, det, _ = t.step(None)
        assert det.skipped and after == before

    def test_threads_give_same_result(self, static_seq):
        images, boxes = static_seq
        out = []
        for threads in (1, 3):
            t = Tracker(TrackerConfig(threads=threads))
            t.init(images[0], boxes[0])
            out.append([t.step(img)[0] for img in images[1:4]])
        np.testing.assert_allclose(out[0], out[1], atol=1e-12)

    @pytest.mark.parametrize("box", [(1, 1, 0, 10), (5000, 5000, 10, 10)])
    def test_bad_init_box(self, static_seq, box):
        with pytest.raises(ValueError):
            Tracker().init(static_seq[0][0], box)

    def test_unreadable_first_frame(self):
        with pytest.raises(ValueError):
            Tracker().init(None, (1, 1, 10, 10))

    def test_follows_translation(self):
        images, boxes = make_sequence("translate", frames=15, seed=1)
        t = Tracker()
        t.init(images[0], boxes[0])
        out = [t.step(img)[0] for img in images[1:]]
        err = np.hypot(*(centers(out) - centers(boxes[1:])).T)
        assert np.median(err) < 2.0
