"""Flat array-boundary surface over the facl losses and metrics.

Intended for external training loops that own their buffers: every function
takes C-contiguous float32 numpy arrays of shape (H, W) or (frames, H, W),
never mutates them, and returns freshly allocated float32 gradients.
Internally all sums run in float64, so results agree with the facl package
to well within 1e-6 relative.

Functions
---------
loss(name, x, xhat) -> (value, gradient)
    name in {"mse", "mae", "fal", "fcl"}; 3D inputs are treated as frame
    stacks (mean loss, per-frame gradient).
facl_sampler(seed, total_steps, alpha) -> FaclSampler
    Stateful alternation sampler; .step(x, xhat, t) -> (value, gradient,
    which). Draw sequence is bit-identical to the facl package for the same
    seed. Single-owner: do not share across threads.
metrics(pred, obs, **config) -> dict
    Metric name (with parameterization) to value; degenerate scores map to
    None. Config keys: thresholds, window, n_bins, pool_sizes, metrics.
"""

from __future__ import annotations

import numpy as np

from facl.losses import LOSSES, FaclSampler as _CoreSampler, ScheduleConfig, sequence_loss
from facl.metrics import MetricConfig, evaluate_sequences

__version__ = "0.1.0"

BOUND_LOSSES = ("mse", "mae", "fal", "fcl")


def _validate(arr, name: str) -> np.ndarray:
    if not isinstance(arr, np.ndarray):
        raise TypeError(f"{name} must be a numpy array, got {type(arr).__name__}")
    if arr.dtype != np.float32:
        raise TypeError(f"{name} must be float32, got {arr.dtype}")
    if not arr.flags["C_CONTIGUOUS"]:
        raise ValueError(f"{name} must be C-contiguous; pass np.ascontiguousarray(...)")
    if arr.ndim not in (2, 3):
        raise ValueError(f"{name} must be (H, W) or (frames, H, W), got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def _pair(x, xhat) -> tuple[np.ndarray, np.ndarray]:
    a = _validate(x, "x")
    b = _validate(xhat, "xhat")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: x {a.shape} vs xhat {b.shape}")
    return a, b


def loss(name: str, x: np.ndarray, xhat: np.ndarray) -> tuple[float, np.ndarray]:
    """Evaluate one loss; returns (value, float32 gradient w.r.t. xhat)."""
    if name not in BOUND_LOSSES:
        raise ValueError(f"name must be one of {BOUND_LOSSES}, got {name!r}")
    a, b = _pair(x, xhat)
    if a.ndim == 3:
        result = sequence_loss(name, a.astype(np.float64), b.astype(np.float64))
    else:
        result = LOSSES[name](a.astype(np.float64), b.astype(np.float64))
    return float(result.value), np.ascontiguousarray(result.gradient, dtype=np.float32)


class FaclSampler:
    """Seed-exact mirror of the facl alternation sampler at the float32 boundary."""

    def __init__(self, seed: int, total_steps: int, alpha: float):
        self._inner = _CoreSampler(ScheduleConfig(total_steps=total_steps, alpha=alpha, seed=seed))

    def step(self, x: np.ndarray, xhat: np.ndarray, t: int) -> tuple[float, np.ndarray, str]:
        a, b = _pair(x, xhat)
        if a.ndim != 2:
            raise ValueError("sampler.step expects single (H, W) frames")
        result = self._inner.step(a.astype(np.float64), b.astype(np.float64), t)
        return float(result.value), np.ascontiguousarray(result.gradient, dtype=np.float32), result.which

    def draw_which(self, t: int) -> str:
        return self._inner.draw_which(t)


def facl_sampler(seed: int, total_steps: int, alpha: float) -> FaclSampler:
    return FaclSampler(seed, total_steps, alpha)


def metrics(pred: np.ndarray, obs: np.ndarray, **config) -> dict:
    """Evaluate the metric suite; keys are ``metric`` or ``metric[param]``."""
    a, b = _pair(pred, obs)
    cfg = MetricConfig(
        metrics=tuple(config.get("metrics", ("mae", "mse", "ssim", "fss", "rhd", "csi"))),
        thresholds=tuple(config.get("thresholds", (0.5,))),
        fss_window=int(config.get("window", 16)),
        rhd_window=int(config.get("window", 16)),
        n_bins=int(config.get("n_bins", 10)),
        pool_sizes=tuple(config.get("pool_sizes", (1, 4, 16))),
    )
    stack_p = a.astype(np.float64)
    stack_o = b.astype(np.float64)
    if stack_p.ndim == 2:
        stack_p, stack_o = stack_p[np.newaxis], stack_o[np.newaxis]
    report = evaluate_sequences(stack_p, stack_o, cfg)
    out: dict = {}
    for (metric, param), value in report.aggregates().items():
        out[f"{metric}[{param}]" if param else metric] = value
    # keep explicitly-skipped parameterizations visible as None
    for row in report.rows:
        key = f"{row.metric}[{row.param}]" if row.param else row.metric
        if row.value is None and key not in out:
            out[key] = None
    return out
