import pytest

from fsrdcf.config import TrackerConfig


def test_round_trip():
    cfg = TrackerConfig(features="gray", gs_sweeps=2, window=False, reg_eta=1.5)
    back = TrackerConfig.from_text(cfg.to_text())
    assert back == cfg
    assert back.digest() == cfg.digest()


def test_digest_changes():
    assert TrackerConfig().digest() != TrackerConfig(n_scales=5).digest()


def test_comments_and_blanks():
    cfg = TrackerConfig.from_text("# tuned\n\nlearning_rate = 0.01  # slower\nsymmetric_gs = yes\n")
    assert cfg.learning_rate == 0.01 and cfg.symmetric_gs


@pytest.mark.parametrize("text,line", [
    ("gs_sweeps = 4\nbogus = 1\n", 2),
    ("gs_sweeps four\n", 1),
    ("\nwindow = maybe\n", 2),
])
def test_errors_carry_line(text, line):
    with pytest.raises(ValueError, match=f":{line}:"):
        TrackerConfig.from_text(text)


@pytest.mark.parametrize("kw", [{"features": "sift"}, {"n_scales": 4}, {"reg_keep": 0}, {"cell_size": 0}])
def test_validation(kw):
    with pytest.raises(ValueError):
        TrackerConfig(**kw)


def test_regularizer_view():
    spec = TrackerConfig(reg_mu=0.2).regularizer
    assert spec.mu == 0.2 and spec.eta == 3.0
