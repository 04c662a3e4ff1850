import numpy as np
import pytest
from hypothesis import given, strategies as st

from facl.errors import DegenerateInputError, ShapeError
from facl.losses import (
    FAL,
    FCL,
    FaclSampler,
    LOSSES,
    ScheduleConfig,
    fal,
    fal_decomposition,
    fcl,
    fourier_l2,
    mae,
    mse,
    schedule_threshold,
    sequence_loss,
    sigmoid,
    sigmoid_chain,
)
from facl.optim import finite_difference_gradient
from facl.spectral import circular_shift, dft2, idft2


def random_pair(seed, size=8):
    gen = np.random.default_rng(seed)
    return gen.uniform(0, 1, (size, size)), gen.uniform(0, 1, (size, size))


# ---------------------------------------------------------------------------
# elementary values
# ---------------------------------------------------------------------------

def test_mse_and_mae_basics():
    assert mse([[0.0, 0.0]], [[1.0, 1.0]]).value == pytest.approx(1.0)
    assert mae([[0.0, 0.0]], [[1.0, 1.0]]).value == pytest.approx(1.0)
    x, _ = random_pair(0)
    assert mse(x, x).value == 0.0
    assert mae(x, x).value == 0.0


def test_shape_mismatch_rejected():
    for fn in LOSSES.values():
        with pytest.raises(ShapeError):
            fn(np.ones((3, 3)), np.ones((3, 4)))


def test_fal_identity_is_zero():
    x, _ = random_pair(1)
    assert fal(x, x).value == pytest.approx(0.0, abs=1e-15)


def test_fal_impulse_vs_zero_prediction():
    # amplitudes of [[1,0],[0,0]] are all 0.5, prediction all 0: mean of 0.25
    result = fal([[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]])
    assert result.value == pytest.approx(0.25, abs=1e-12)


def test_fal_invariant_to_all_circular_shifts():
    x, _ = random_pair(2)
    for dr in range(8):
        for dc in range(8):
            assert fal(x, circular_shift(x, dr, dc)).value <= 1e-9


def test_fal_phase_blindness():
    # replace the prediction's phase by that of an unrelated real field:
    # amplitude is untouched, so FAL must not move
    x, xhat = random_pair(3)
    scrambler = np.random.default_rng(99).uniform(0, 1, x.shape)
    spectrum = np.abs(dft2(xhat)) * np.exp(1j * np.angle(dft2(scrambler)))
    rebuilt = idft2(spectrum)
    assert np.max(np.abs(np.fft.ifft2(spectrum, norm="ortho").imag)) <= 1e-9
    assert fal(x, rebuilt).value == pytest.approx(fal(x, xhat).value, abs=1e-6)


def test_fcl_identity_scale_and_anticorrelation():
    x, _ = random_pair(4)
    assert fcl(x, x).value == pytest.approx(0.0, abs=1e-12)
    for beta in (0.1, 0.5, 2.0, 10.0):
        assert fcl(x, beta * x).value == pytest.approx(0.0, abs=1e-12)
    assert fcl(x, -x).value == pytest.approx(2.0, abs=1e-12)


def test_fcl_commutative():
    x, xhat = random_pair(5)
    assert fcl(x, xhat).value == pytest.approx(fcl(xhat, x).value, abs=1e-12)


def test_fcl_rejects_all_zero():
    x, _ = random_pair(6)
    with pytest.raises(DegenerateInputError):
        fcl(x, np.zeros_like(x))
    with pytest.raises(DegenerateInputError):
        fcl(np.zeros_like(x), x)


@given(seed=st.integers(0, 2**31))
def test_fcl_range_hypothesis(seed):
    gen = np.random.default_rng(seed)
    x = gen.uniform(-1, 1, (6, 6))
    xhat = gen.uniform(-1, 1, (6, 6))
    if not np.any(x) or not np.any(xhat):
        return
    assert 0.0 <= fcl(x, xhat).value <= 2.0


def test_fcl_range_ten_thousand_pairs():
    gen = np.random.default_rng(14)
    for _ in range(10_000):
        x = gen.uniform(-1, 1, (4, 4))
        xhat = gen.uniform(-1, 1, (4, 4))
        assert 0.0 <= fcl(x, xhat).value <= 2.0


def test_fcl_gradient_vanishes_at_scaled_prediction():
    x, _ = random_pair(7)
    for beta in (0.1, 0.5, 2.0, 10.0):
        analytic = fcl(x, beta * x).gradient
        assert np.max(np.abs(analytic)) <= 1e-9
        numeric = finite_difference_gradient(fcl, x, beta * x)
        assert np.max(np.abs(numeric)) <= 1e-6


def test_fourier_l2_equals_mse():
    for seed in range(10):
        x, xhat = random_pair(seed, size=12)
        a = fourier_l2(x, xhat)
        b = mse(x, xhat)
        assert a.value == pytest.approx(b.value, rel=1e-9, abs=1e-12)
        assert np.max(np.abs(a.gradient - b.gradient)) <= 1e-9


def test_fourier_l2_constant_offset():
    x, _ = random_pair(8)
    c = 0.37
    assert fourier_l2(x, x + c).value == pytest.approx(c * c, rel=1e-9)
    assert fourier_l2(x, x).value == pytest.approx(0.0, abs=1e-15)


# ---------------------------------------------------------------------------
# the decomposition identity
# ---------------------------------------------------------------------------

def test_decomposition_identity_random_pairs():
    for seed in range(20):
        x, xhat = random_pair(seed, size=10)
        parts = fal_decomposition(x, xhat)
        assert parts.fal_value == pytest.approx(fal(x, xhat).value, abs=1e-9)


def test_decomposition_at_equality_cross_terms_cancel():
    # both cross terms equal 2*sum(x^2)/(M*N) and cancel; L2 is zero
    x, _ = random_pair(9)
    parts = fal_decomposition(x, x)
    expected_cross = 2.0 * np.mean(x * x)
    assert parts.l2 == 0.0
    assert parts.cross_spatial == pytest.approx(expected_cross, rel=1e-12)
    assert parts.cross_spectral == pytest.approx(expected_cross, rel=1e-9)


def test_decomposition_translation_gap_tracks_l2(digit_target):
    # interior translation: FAL collapses, so the cross gap matches L2
    field = np.zeros((64, 64))
    field[16:48, 16:48] = digit_target
    shifted = np.zeros_like(field)
    shifted[4:, 4:] = field[:-4, :-4]
    parts = fal_decomposition(field, shifted)
    gap = abs(parts.cross_spatial - parts.cross_spectral)
    assert abs(gap - parts.l2) <= 0.05 * parts.l2


# ---------------------------------------------------------------------------
# gradient oracle across all losses
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(LOSSES))
def test_gradients_match_finite_differences(name):
    from facl.optim import grad_check

    report = grad_check(name, trials=50, sizes=(8, 16), tolerance=1e-4, seed=31)
    assert report.passed, report.summary()


def test_gradient_zero_at_equality():
    x, _ = random_pair(10)
    for fn in LOSSES.values():
        assert np.max(np.abs(fn(x, x).gradient)) <= 1e-9


# ---------------------------------------------------------------------------
# sigmoid reparameterization
# ---------------------------------------------------------------------------

def test_sigmoid_values():
    assert sigmoid(0.0) == pytest.approx(0.5)
    assert sigmoid(50.0) == pytest.approx(1.0, abs=1e-15)
    assert sigmoid(-50.0) == pytest.approx(0.0, abs=1e-15)


def test_sigmoid_chain_matches_finite_differences():
    gen = np.random.default_rng(11)
    x = gen.uniform(0, 1, (6, 6))
    z = gen.uniform(-2, 2, (6, 6))
    xhat = sigmoid(z)
    analytic = sigmoid_chain(mse(x, xhat).gradient, xhat)
    h = 1e-6
    numeric = np.zeros_like(z)
    for idx in np.ndindex(z.shape):
        bump = z.copy()
        bump[idx] += h
        plus = mse(x, sigmoid(bump)).value
        bump[idx] -= 2 * h
        minus = mse(x, sigmoid(bump)).value
        numeric[idx] = (plus - minus) / (2 * h)
    mask = np.abs(analytic) > 1e-9
    rel = np.abs(analytic - numeric)[mask] / np.abs(analytic)[mask]
    assert rel.max() <= 1e-4


# ---------------------------------------------------------------------------
# schedule and alternation
# ---------------------------------------------------------------------------

def test_schedule_endpoints_and_tail():
    cfg = ScheduleConfig(total_steps=1000, alpha=0.3)
    assert schedule_threshold(0, cfg) == 1.0
    assert schedule_threshold(700, cfg) == 0.0
    assert schedule_threshold(1000, cfg) == 0.0


@pytest.mark.parametrize("shape", ["cosine", "linear"])
def test_schedule_non_increasing(shape):
    cfg = ScheduleConfig(total_steps=500, alpha=0.2, shape=shape)
    values = [schedule_threshold(t, cfg) for t in range(501)]
    assert values[0] == 1.0
    assert all(a >= b for a, b in zip(values, values[1:]))
    assert all(v == 0.0 for v in values[400:])


def test_schedule_rejects_out_of_range():
    cfg = ScheduleConfig(total_steps=10)
    with pytest.raises(ValueError):
        schedule_threshold(-1, cfg)
    with pytest.raises(ValueError):
        schedule_threshold(11, cfg)


def test_schedule_config_validation():
    with pytest.raises(ValueError):
        ScheduleConfig(total_steps=0)
    with pytest.raises(ValueError):
        ScheduleConfig(total_steps=10, alpha=1.0)
    with pytest.raises(ValueError):
        ScheduleConfig(total_steps=10, shape="staircase")


def test_sampler_forced_endpoints():
    x, xhat = random_pair(12)
    cfg = ScheduleConfig(total_steps=100, alpha=0.2, seed=5)
    sampler = FaclSampler(cfg)
    # P(0) = 1: p in [0,1) can never exceed it, so FCL always
    assert all(sampler.step(x, xhat, 0).which == FCL for _ in range(50))
    # P(T) = 0: p > 0 almost surely, so FAL
    assert all(sampler.step(x, xhat, 100).which == FAL for _ in range(50))


def test_sampler_deterministic_given_seed():
    cfg = ScheduleConfig(total_steps=200, alpha=0.2, seed=77)
    steps = list(range(201)) * 2
    first = [FaclSampler(cfg).draw_which(t) for t in steps]
    second = [FaclSampler(cfg).draw_which(t) for t in steps]
    assert first == second


def test_sampler_monte_carlo_frequency():
    cfg = ScheduleConfig(total_steps=1000, alpha=0.2, seed=3)
    t = 400  # cosine threshold: P = 0.5 at the midpoint of the decay
    expected = 1.0 - schedule_threshold(t, cfg)
    sampler = FaclSampler(cfg)
    draws = sum(sampler.draw_which(t) == FAL for _ in range(100_000))
    assert abs(draws / 100_000 - expected) <= 0.01


# ---------------------------------------------------------------------------
# sequence reduction
# ---------------------------------------------------------------------------

def test_sequence_loss_mean_and_stacked_gradient():
    gen = np.random.default_rng(13)
    xs = gen.uniform(0, 1, (4, 6, 6))
    xhats = gen.uniform(0, 1, (4, 6, 6))
    result = sequence_loss("mse", xs, xhats)
    per_frame = [mse(xs[t], xhats[t]) for t in range(4)]
    assert result.value == pytest.approx(np.mean([e.value for e in per_frame]))
    assert result.gradient.shape == (4, 6, 6)
    for t in range(4):
        assert np.allclose(result.gradient[t], per_frame[t].gradient / 4.0)
