import numpy as np
import pytest

from facl.losses import fal, mse
from facl.metrics import rhd
from facl.transforms import (
    TransformSpec,
    apply_transform,
    fal_curve_sweep,
    make_bimodal_field,
    metric_transform_table,
    standard_distortions,
)


@pytest.fixture(scope="module")
def centered_digit():
    from facl.datagen import synthetic_digit_corpus

    field = np.zeros((64, 64))
    field[18:46, 18:46] = synthetic_digit_corpus(1, seed=2)[0]
    return field


def test_identity_cases(centered_digit):
    same = apply_transform(centered_digit, TransformSpec.translate(0, 0))
    assert np.array_equal(same, centered_digit)
    same = apply_transform(centered_digit, TransformSpec.blur(1, 0.0))
    assert np.allclose(same, centered_digit)


def test_brighten_and_darken_rules():
    field = np.array([[0.6, 0.4], [0.5, 0.9]])
    brightened = apply_transform(field, TransformSpec.brighten(2.0, 0.5))
    assert brightened[0, 0] == 1.0  # 1.2 clipped
    assert brightened[0, 1] == 0.4  # below the floor, untouched
    assert brightened[1, 0] == 0.5  # not strictly above the floor
    darkened = apply_transform(field, TransformSpec.darken(2.0, 0.5))
    assert darkened[0, 1] == pytest.approx(0.2)
    assert darkened[1, 1] == 0.9


def test_blur_kernel_validation():
    with pytest.raises(ValueError):
        TransformSpec.blur(4, 1.0)
    with pytest.raises(ValueError):
        TransformSpec.blur(-3, 1.0)


def test_translation_bounds_checked():
    with pytest.raises(ValueError):
        apply_transform(np.ones((8, 8)), TransformSpec.translate(8, 0))


def test_all_transforms_stay_in_unit_range(centered_digit):
    for spec in standard_distortions():
        out = apply_transform(centered_digit, spec)
        assert out.min() >= 0.0 and out.max() <= 1.0


def test_rotation_moves_mass_clockwise():
    field = np.zeros((33, 33))
    field[4, 16] = 1.0  # above center
    rotated = apply_transform(field, TransformSpec.rotate(90.0))
    row, col = np.unravel_index(rotated.argmax(), rotated.shape)
    assert col > 24 and abs(row - 16) <= 1  # ends up right of center


def test_fal_translation_robustness(centered_digit):
    shifted = apply_transform(centered_digit, TransformSpec.translate(4, 4))
    fal_value = fal(centered_digit, shifted).value
    l2_value = mse(centered_digit, shifted).value
    assert fal_value <= 0.05 * l2_value


def test_translation_sweep_gap_tracks_l2(centered_digit):
    rows = fal_curve_sweep(centered_digit, "translate", range(0, 9))
    assert rows[0].l2 == 0.0 and rows[0].cross_gap == pytest.approx(0.0, abs=1e-12)
    for row in rows[1:]:
        assert abs(row.cross_gap - row.l2) <= 0.05 * row.l2


def test_blur_sweep_fal_tracks_l2(centered_digit):
    rows = fal_curve_sweep(centered_digit, "blur", (0.5, 1.0, 1.5, 2.0))
    for row in rows:
        assert 0.85 <= row.fal / row.l2 <= 1.15


def test_sweep_param_zero_all_differences_zero(centered_digit):
    for mode in ("blur", "translate"):
        row = fal_curve_sweep(centered_digit, mode, [0])[0]
        assert row.l2 == 0.0
        assert row.fal == pytest.approx(0.0, abs=1e-12)
        assert row.cross_gap == pytest.approx(0.0, abs=1e-10)


def test_bimodal_field_properties():
    field = make_bimodal_field(seed=1)
    assert field.shape == (64, 64)
    assert field.min() >= 0.0 and field.max() <= 1.0
    nonzero = field[field >= 1e-5]
    low = np.mean(nonzero < 0.45)
    high = np.mean(nonzero >= 0.55)
    assert low > 0.2 and high > 0.2  # mass on both histogram flanks
    assert np.array_equal(field, make_bimodal_field(seed=1))


def test_metric_table_identity_row_optima():
    field = make_bimodal_field(seed=3)
    table = metric_transform_table(field, specs=[TransformSpec.translate(2, 2)])
    identity = {(m, p): v for label, m, p, v in table if label == "identity"}
    assert identity[("mae", "")] == 0.0
    assert identity[("ssim", "")] == pytest.approx(1.0, abs=1e-9)
    assert identity[("rhd", "win=16,bins=10")] == 0.0


def test_table_orderings_blur_vs_translate():
    # the headline ordering: RHD punishes blur harder than a small shift
    wins = 0
    for seed in range(10):
        field = make_bimodal_field(seed=seed)
        blurred = apply_transform(field, TransformSpec.blur(27, 15.0))
        shifted = apply_transform(field, TransformSpec.translate(4, 4))
        if rhd(blurred, field) > rhd(shifted, field):
            wins += 1
    assert wins >= 8
