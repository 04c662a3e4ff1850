import numpy as np
import pytest

from facl.arrayio import read_idx_images, read_sequences, write_idx_images, write_sequences
from facl.datagen import (
    GenConfig,
    MotionState,
    frame_centroid,
    generate_dataset,
    generate_sequence,
    load_digit_corpus,
    noise_free,
    render_digit,
    step_motion,
    synthetic_digit_corpus,
)


@pytest.fixture(scope="module")
def corpus():
    return synthetic_digit_corpus(32, seed=11)


# ---------------------------------------------------------------------------
# IDX round trip
# ---------------------------------------------------------------------------

def test_idx_round_trip(tmp_path, corpus):
    path = tmp_path / "digits.idx"
    as_bytes = np.round(corpus * 255).astype(np.uint8)
    write_idx_images(path, as_bytes)
    back = read_idx_images(path)
    assert np.array_equal(back, as_bytes)
    # header is big-endian magic then dims
    raw = path.read_bytes()
    assert raw[:4] == b"\x00\x00\x08\x03"
    assert int.from_bytes(raw[4:8], "big") == len(corpus)


def test_idx_corpus_scaling(tmp_path):
    path = tmp_path / "two.idx"
    img = np.zeros((1, 28, 28), dtype=np.uint8)
    img[0, 0, 0] = 255
    img[0, 0, 1] = 0
    write_idx_images(path, img)
    sprites = load_digit_corpus(path)
    assert sprites[0, 0, 0] == 1.0
    assert sprites[0, 0, 1] == 0.0


def test_idx_bad_magic(tmp_path):
    path = tmp_path / "bad.idx"
    path.write_bytes(b"\x00\x00\x08\x01" + b"\x00" * 12)
    with pytest.raises(ValueError, match="magic"):
        read_idx_images(path)


def test_idx_truncated(tmp_path):
    path = tmp_path / "short.idx"
    path.write_bytes(b"\x00\x00\x08\x03" + (100).to_bytes(4, "big") * 3)
    with pytest.raises(ValueError, match="truncated"):
        read_idx_images(path)


# ---------------------------------------------------------------------------
# NPY sequence container
# ---------------------------------------------------------------------------

def test_npy_round_trip_bitwise(tmp_path, corpus):
    cfg = GenConfig(seq_len=4, digits=1, seed=3)
    seqs = [generate_sequence(cfg, corpus) for _ in range(2)]
    path = tmp_path / "seqs.npy"
    write_sequences(path, seqs)
    loaded = read_sequences(path)
    assert loaded.shape == (2, 4, 64, 64)
    second = tmp_path / "again.npy"
    write_sequences(second, loaded)
    assert path.read_bytes() == second.read_bytes()


def test_npy_header_format(tmp_path, corpus):
    path = tmp_path / "seqs.npy"
    write_sequences(path, np.zeros((1, 2, 8, 8)))
    raw = path.read_bytes()
    assert raw[:6] == b"\x93NUMPY"
    assert raw[6:8] == b"\x01\x00"  # format version 1.0
    assert b"'<f4'" in raw[:128]


def test_npy_empty_list_rejected(tmp_path):
    with pytest.raises(ValueError):
        write_sequences(tmp_path / "none.npy", [])


# ---------------------------------------------------------------------------
# motion
# ---------------------------------------------------------------------------

def test_zero_noise_recovers_linear_motion():
    rng = np.random.default_rng(0)
    state = MotionState(x=10.0, y=12.0, u0=2.0, v0=-1.0)
    state = step_motion(state, rng, sigma=0.0, x_max=36.0, y_max=36.0)
    assert (state.x, state.y) == (12.0, 11.0)
    assert (state.u0, state.v0) == (2.0, -1.0)


def test_velocity_mean_preserved():
    rng = np.random.default_rng(1)
    draws = 100_000
    total = 0.0
    state = MotionState(x=18.0, y=18.0, u0=1.5, v0=0.0)
    for _ in range(draws):
        moved = step_motion(state, rng, sigma=1.0, x_max=36.0, y_max=36.0)
        total += moved.x - state.x
    mean_step = total / draws
    assert abs(mean_step - 1.5) <= 3.0 / np.sqrt(draws)


def test_bounce_reflects_and_negates():
    rng = np.random.default_rng(2)
    state = MotionState(x=35.0, y=18.0, u0=4.0, v0=0.0)
    moved = step_motion(state, rng, sigma=0.0, x_max=36.0, y_max=36.0)
    assert moved.x == pytest.approx(33.0)  # 39 reflects to 2*36-39
    assert moved.u0 == -4.0
    assert 0.0 <= moved.x <= 36.0


# ---------------------------------------------------------------------------
# sequences
# ---------------------------------------------------------------------------

def test_sequence_determinism(corpus):
    cfg = GenConfig(seq_len=6, digits=2, seed=9)
    a = generate_sequence(cfg, corpus)
    b = generate_sequence(cfg, corpus)
    assert np.array_equal(a, b)


def test_dataset_determinism_and_thread_independence(corpus):
    cfg = GenConfig(seq_len=3, digits=1, seed=4)
    serial = generate_dataset(cfg, corpus, count=6, threads=1)
    threaded = generate_dataset(cfg, corpus, count=6, threads=4)
    assert np.array_equal(serial, threaded)


def test_frames_in_range_and_inside_canvas(corpus):
    cfg = GenConfig(seq_len=12, digits=2, seed=5)
    seq = generate_sequence(cfg, corpus)
    assert seq.min() >= 0.0 and seq.max() <= 1.0
    assert np.all(np.isfinite(seq))


def test_integer_velocity_no_noise_is_pure_shift(corpus):
    sprite = render_digit(5)
    cfg = GenConfig(seq_len=5, digits=1, noise_sigma=0.0, seed=0)
    states = [MotionState(x=4.0, y=6.0, u0=2.0, v0=3.0)]
    seq = generate_sequence(cfg, corpus, init_states=states, init_sprites=[sprite])
    for t in range(5):
        expected = np.zeros((64, 64))
        expected[6 + 3 * t : 34 + 3 * t, 4 + 2 * t : 32 + 2 * t] = sprite
        assert np.allclose(seq[t], expected, atol=1e-12)


def test_expected_trajectory_preserved(corpus):
    # paired runs: same seed with and without noise share the initial draw,
    # so the mean noisy centroid displacement should vanish
    cfg = GenConfig(seq_len=11, digits=1, seed=100)
    diffs = []
    for i in range(300):
        noisy_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, i]))
        clean_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, i]))
        noisy = generate_sequence(cfg, corpus, rng=noisy_rng)
        clean = generate_sequence(noise_free(cfg), corpus, rng=clean_rng)
        nr, nc = frame_centroid(noisy[10])
        cr, cc = frame_centroid(clean[10])
        diffs.append((nr - cr, nc - cc))
    mean = np.mean(diffs, axis=0)
    assert np.hypot(*mean) <= 0.5


def test_sprite_values_bounded(corpus):
    assert corpus.min() >= 0.0 and corpus.max() <= 1.0
    assert corpus.shape == (32, 28, 28)


def test_config_validation():
    with pytest.raises(ValueError):
        GenConfig(seq_len=0)
    with pytest.raises(ValueError):
        GenConfig(digits=0)


def test_centroid_of_empty_frame_rejected():
    with pytest.raises(ValueError):
        frame_centroid(np.zeros((8, 8)))
