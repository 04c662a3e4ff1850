"""Stochastic moving-digit sequence generation.

Digits drift across a square canvas with a constant base velocity that is
re-perturbed by fresh Gaussian noise at every step,

    u_t = u0 + sigma * e1,   v_t = v0 + sigma * e2,   e ~ N(0, 1) i.i.d.,

so the expected trajectory equals the noise-free one. Positions are real
valued; digits bounce elastically off the canvas border (position reflects,
the base-velocity component negates) and sprites are drawn with bilinear
splatting so fractional positions render smoothly. Overlapping digits
composite by per-pixel maximum, keeping frames in [0, 1].

Sprites come either from an IDX corpus file (see :mod:`facl.arrayio`) or
from the built-in procedural glyph generator, which rasterizes stroke-based
digit shapes with small random distortions. The procedural corpus keeps the
whole pipeline self-hosted when no corpus file is available.

Randomness is structured for reproducibility: sequence ``i`` of a dataset
draws from ``SeedSequence([master_seed, i])``, and within a sequence the
draw order is fixed (per digit: sprite index, position, speed, heading;
then per step and digit: the two velocity perturbations).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .arrayio import read_idx_images


@dataclass(frozen=True)
class GenConfig:
    """Generation parameters for one sequence family."""

    canvas: int = 64
    digits: int = 2
    seq_len: int = 20
    speed_min: float = 2.0
    speed_max: float = 5.0
    noise_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.seq_len < 1:
            raise ValueError(f"seq_len must be >= 1, got {self.seq_len}")
        if self.digits < 1:
            raise ValueError(f"digits must be >= 1, got {self.digits}")
        if self.canvas < 1:
            raise ValueError(f"canvas must be >= 1, got {self.canvas}")


@dataclass(frozen=True)
class MotionState:
    """Position (pixels, top-left corner of the sprite) and velocities."""

    x: float
    y: float
    u0: float
    v0: float


def step_motion(state: MotionState, rng: np.random.Generator, sigma: float,
                x_max: float, y_max: float) -> MotionState:
    """Advance one step: perturb velocity, move, bounce off the borders.

    The perturbations are independent between axes and drawn fresh every
    step (never accumulated). A bounce reflects the position and negates the
    corresponding base-velocity component.
    """
    e1, e2 = rng.standard_normal(2)
    u_t = state.u0 + sigma * e1
    v_t = state.v0 + sigma * e2
    x, y = state.x + u_t, state.y + v_t
    u0, v0 = state.u0, state.v0
    while not 0.0 <= x <= x_max:
        if x < 0.0:
            x = -x
        else:
            x = 2.0 * x_max - x
        u0 = -u0
    while not 0.0 <= y <= y_max:
        if y < 0.0:
            y = -y
        else:
            y = 2.0 * y_max - y
        v0 = -v0
    return MotionState(x, y, u0, v0)


def _splat(canvas: np.ndarray, sprite: np.ndarray, x: float, y: float) -> None:
    """Add a bilinearly shifted copy of ``sprite`` at real position (x, y)."""
    h, w = sprite.shape
    ix, iy = int(math.floor(x)), int(math.floor(y))
    fx, fy = x - ix, y - iy
    weights = (
        ((iy, ix), (1 - fy) * (1 - fx)),
        ((iy, ix + 1), (1 - fy) * fx),
        ((iy + 1, ix), fy * (1 - fx)),
        ((iy + 1, ix + 1), fy * fx),
    )
    for (r, c), weight in weights:
        if weight > 0.0:
            canvas[r : r + h, c : c + w] += weight * sprite


def _render(states: list[MotionState], sprites: list[np.ndarray], canvas: int) -> np.ndarray:
    frame = np.zeros((canvas, canvas))
    pad = np.zeros((canvas + 1, canvas + 1))
    for state, sprite in zip(states, sprites):
        pad[:] = 0.0
        _splat(pad, sprite, state.x, state.y)
        np.maximum(frame, pad[:canvas, :canvas], out=frame)
    return np.clip(frame, 0.0, 1.0)


def _init_states(cfg: GenConfig, corpus: np.ndarray, rng: np.random.Generator):
    states, sprites = [], []
    for _ in range(cfg.digits):
        idx = int(rng.integers(0, len(corpus)))
        sprite = np.asarray(corpus[idx], dtype=np.float64)
        x_max = cfg.canvas - sprite.shape[1]
        y_max = cfg.canvas - sprite.shape[0]
        if x_max < 0 or y_max < 0:
            raise ValueError(f"sprite {sprite.shape} does not fit canvas {cfg.canvas}")
        x = rng.uniform(0.0, x_max)
        y = rng.uniform(0.0, y_max)
        speed = rng.uniform(cfg.speed_min, cfg.speed_max)
        heading = rng.uniform(0.0, 2.0 * math.pi)
        states.append(MotionState(x, y, speed * math.cos(heading), speed * math.sin(heading)))
        sprites.append(sprite)
    return states, sprites


def generate_sequence(cfg: GenConfig, corpus: np.ndarray,
                      rng: np.random.Generator | None = None,
                      init_states: list[MotionState] | None = None,
                      init_sprites: list[np.ndarray] | None = None) -> np.ndarray:
    """Generate one (seq_len, canvas, canvas) sequence, deterministic per seed.

    Explicit ``init_states``/``init_sprites`` bypass the random initial draw
    (useful for closed-form trajectory checks); the per-step noise still
    comes from the RNG, scaled by ``cfg.noise_sigma``.
    """
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed]))
    if init_states is None or init_sprites is None:
        states, sprites = _init_states(cfg, corpus, rng)
    else:
        states, sprites = list(init_states), list(init_sprites)
    frames = [_render(states, sprites, cfg.canvas)]
    for _ in range(cfg.seq_len - 1):
        states = [
            step_motion(s, rng, cfg.noise_sigma,
                        cfg.canvas - sp.shape[1], cfg.canvas - sp.shape[0])
            for s, sp in zip(states, sprites)
        ]
        frames.append(_render(states, sprites, cfg.canvas))
    return np.stack(frames)


def generate_dataset(cfg: GenConfig, corpus: np.ndarray, count: int,
                     threads: int = 1) -> np.ndarray:
    """Generate ``count`` sequences as a (count, seq_len, canvas, canvas) stack.

    Sequence ``i`` uses its own stream seeded from (cfg.seed, i), so results
    are independent of worker count and iteration order.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")

    def one(i: int) -> np.ndarray:
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, i]))
        return generate_sequence(cfg, corpus, rng=rng)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return np.stack(list(pool.map(one, range(count))))
    return np.stack([one(i) for i in range(count)])


def load_digit_corpus(path) -> np.ndarray:
    """Load an IDX image file as a float corpus scaled to [0, 1] by /255."""
    return read_idx_images(path).astype(np.float64) / 255.0


# ---------------------------------------------------------------------------
# Procedural digit sprites
# ---------------------------------------------------------------------------

def _arc(cx, cy, rx, ry, deg0, deg1, n=28):
    angles = np.radians(np.linspace(deg0, deg1, n))
    return np.column_stack([cx + rx * np.cos(angles), cy + ry * np.sin(angles)])


def _poly(*points):
    return np.asarray(points, dtype=np.float64)


# Stroke skeletons per digit, as polylines in a unit box (x right, y up).
_GLYPHS: dict[int, list[np.ndarray]] = {
    0: [_arc(0.5, 0.5, 0.26, 0.40, 90, 450)],
    1: [_poly((0.36, 0.74), (0.54, 0.92), (0.54, 0.08)), _poly((0.36, 0.08), (0.70, 0.08))],
    2: [_arc(0.5, 0.70, 0.24, 0.22, 170, -20), _poly((0.72, 0.62), (0.26, 0.08)), _poly((0.26, 0.08), (0.76, 0.08))],
    3: [_arc(0.48, 0.70, 0.24, 0.21, 150, -80), _arc(0.48, 0.29, 0.26, 0.22, 80, -150)],
    4: [_poly((0.64, 0.92), (0.22, 0.36), (0.80, 0.36)), _poly((0.64, 0.62), (0.64, 0.08))],
    5: [_poly((0.74, 0.92), (0.30, 0.92), (0.28, 0.55)), _arc(0.48, 0.33, 0.26, 0.26, 125, -125)],
    6: [_poly((0.66, 0.90), (0.46, 0.66), (0.33, 0.42)), _arc(0.49, 0.29, 0.21, 0.22, 0, 360)],
    7: [_poly((0.24, 0.92), (0.78, 0.92), (0.44, 0.08))],
    8: [_arc(0.5, 0.69, 0.19, 0.165, 0, 360), _arc(0.5, 0.295, 0.235, 0.215, 0, 360)],
    9: [_arc(0.48, 0.66, 0.21, 0.20, 0, 360), _poly((0.69, 0.64), (0.64, 0.34), (0.52, 0.08))],
}


def _segment_distance(px, py, a, b):
    """Distance from grid points (px, py) to segment a-b."""
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    length_sq = dx * dx + dy * dy
    if length_sq == 0.0:
        return np.hypot(px - ax, py - ay)
    t = np.clip(((px - ax) * dx + (py - ay) * dy) / length_sq, 0.0, 1.0)
    return np.hypot(px - (ax + t * dx), py - (ay + t * dy))


def render_digit(digit: int, size: int = 28, thickness: float = 0.055,
                 softness: float = 0.035, transform=None) -> np.ndarray:
    """Rasterize one digit glyph to a (size, size) field in [0, 1].

    ``transform`` optionally maps unit-box stroke points (applied before
    rasterization) to vary shape between instances.
    """
    js = (np.arange(size) + 0.5) / size
    px, py = np.meshgrid(js, 1.0 - js, indexing="xy")
    dist = np.full((size, size), np.inf)
    for stroke in _GLYPHS[digit % 10]:
        pts = stroke if transform is None else transform(stroke)
        for a, b in zip(pts[:-1], pts[1:]):
            dist = np.minimum(dist, _segment_distance(px, py, a, b))
    return np.clip((thickness - dist) / softness + 1.0, 0.0, 1.0)


def synthetic_digit_corpus(count: int, seed: int = 0, size: int = 28) -> np.ndarray:
    """Generate a (count, size, size) corpus of randomly distorted digit sprites.

    Each sprite gets a random digit class, a small rotation, scale jitter and
    stroke-thickness jitter, all drawn from one seeded stream.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xD161]))
    sprites = np.empty((count, size, size))
    for i in range(count):
        digit = int(rng.integers(0, 10))
        angle = math.radians(rng.uniform(-8.0, 8.0))
        scale = rng.uniform(0.88, 1.06)
        shift = rng.uniform(-0.03, 0.03, size=2)
        thickness = rng.uniform(0.048, 0.068)
        cos_a, sin_a = math.cos(angle), math.sin(angle)
        rot = np.array([[cos_a, -sin_a], [sin_a, cos_a]])

        def transform(points):
            centered = (points - 0.5) * scale
            return centered @ rot.T + 0.5 + shift

        sprites[i] = render_digit(digit, size, thickness=thickness, transform=transform)
    return sprites


def frame_centroid(frame: np.ndarray) -> tuple[float, float]:
    """Intensity-weighted centroid (row, col) of a frame."""
    frame = np.asarray(frame, dtype=np.float64)
    total = frame.sum()
    if total == 0.0:
        raise ValueError("centroid of an all-zero frame is undefined")
    rows = np.arange(frame.shape[0])
    cols = np.arange(frame.shape[1])
    return (
        float((frame.sum(axis=1) * rows).sum() / total),
        float((frame.sum(axis=0) * cols).sum() / total),
    )


def noise_free(cfg: GenConfig) -> GenConfig:
    """The same configuration with the velocity perturbation turned off."""
    return replace(cfg, noise_sigma=0.0)
