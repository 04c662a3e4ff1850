"""Forecast verification metrics: RHD, FSS, CSI (plain and pooled), SSIM, MAE/MSE.

Conventions shared by the patch-based scores:

* binarization uses ``value >= threshold``;
* patches are non-overlapping windows anchored at (0, 0); trailing rows and
  columns that do not fill a window are dropped;
* degenerate scores (0/0) are reported as ``None`` rather than a number,
  so empty frames cannot inflate aggregates.

RHD (regional histogram divergence) compares per-patch intensity histograms
with the KL divergence D(observed || predicted), observation first. Counts
use 10 uniform bins over [0, 1] by default and exclude intensities below a
small cutoff (background zeros dominate these images). Each histogram gets
additive smoothing before normalization so a bin that is empty on one side
keeps the divergence finite.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.signal import fftconvolve

from .errors import ShapeError
from .spectral import as_field, as_sequence

DEFAULT_EPS = 1e-5
DEFAULT_BINS = 10
DEFAULT_WINDOW = 16
DEFAULT_SMOOTHING = 1e-6

# Per-dataset CSI threshold lists, rescaled to [0, 1] by the documented
# pixel scale of each product (255 for 8-bit products, 100 for the rainfall
# scaling used by the MeteoNet benchmark lineage).
CSI_THRESHOLD_PRESETS: dict[str, tuple[float, ...]] = {
    "sevir": tuple(t / 255.0 for t in (16, 74, 133, 160, 181, 219)),
    "meteonet": tuple(t / 100.0 for t in (12, 18, 24, 32)),
    "hko7": tuple(t / 255.0 for t in (84, 117, 140, 158, 185)),
}


def _check_pair(pred, obs):
    p = as_field(pred, "pred")
    o = as_field(obs, "obs")
    if p.shape != o.shape:
        raise ShapeError(f"shape mismatch: pred {p.shape} vs obs {o.shape}")
    return p, o


def _tile(x: np.ndarray, window: int) -> np.ndarray:
    """Reshape to (rows, cols, window, window) patches, dropping remainders."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    m, n = x.shape
    if window > m or window > n:
        raise ShapeError(f"window {window} larger than field {x.shape}")
    rows, cols = m // window, n // window
    trimmed = x[: rows * window, : cols * window]
    return trimmed.reshape(rows, window, cols, window).swapaxes(1, 2)


def _smoothed_histogram(values: np.ndarray, n_bins: int, smoothing: float) -> np.ndarray:
    counts, _ = np.histogram(values, bins=n_bins, range=(0.0, 1.0))
    weights = counts.astype(np.float64) + smoothing
    return weights / weights.sum()


def rhd(
    pred,
    obs,
    window: int = DEFAULT_WINDOW,
    n_bins: int = DEFAULT_BINS,
    eps: float = DEFAULT_EPS,
    smoothing: float = DEFAULT_SMOOTHING,
) -> Optional[float]:
    """Mean per-patch KL divergence D(obs histogram || pred histogram).

    Patches where either side has no intensity >= eps carry no
    distributional information and are skipped; if every patch is skipped
    the result is ``None``. Always non-negative, exactly 0 when all kept
    patch histograms coincide. Not symmetric in its arguments.
    """
    value, _, _ = rhd_detailed(pred, obs, window, n_bins, eps, smoothing)
    return value


def rhd_detailed(
    pred,
    obs,
    window: int = DEFAULT_WINDOW,
    n_bins: int = DEFAULT_BINS,
    eps: float = DEFAULT_EPS,
    smoothing: float = DEFAULT_SMOOTHING,
) -> tuple[Optional[float], int, int]:
    """RHD plus bookkeeping: (value or None, patches skipped, patches total)."""
    if n_bins < 2:
        raise ValueError(f"n_bins must be >= 2, got {n_bins}")
    p, o = _check_pair(pred, obs)
    pred_patches = _tile(p, window)
    obs_patches = _tile(o, window)
    rows, cols = pred_patches.shape[:2]
    total = rows * cols
    divergences = []
    for i in range(rows):
        for j in range(cols):
            ov = obs_patches[i, j].ravel()
            pv = pred_patches[i, j].ravel()
            ov = ov[ov >= eps]
            pv = pv[pv >= eps]
            if ov.size == 0 or pv.size == 0:
                continue
            ho = _smoothed_histogram(ov, n_bins, smoothing)
            hp = _smoothed_histogram(pv, n_bins, smoothing)
            divergences.append(float(np.sum(ho * np.log(ho / hp))))
    if not divergences:
        return None, total, total
    return float(np.mean(divergences)), total - len(divergences), total


def fss(pred, obs, threshold: float, window: int = DEFAULT_WINDOW) -> Optional[float]:
    """Fractions skill score over patch coverage fractions, in [0, 1].

    ``None`` when neither side has a positive anywhere (the score is 0/0
    there; counting it as perfect would inflate aggregates).
    """
    p, o = _check_pair(pred, obs)
    fp = _tile((p >= threshold).astype(np.float64), window).mean(axis=(2, 3))
    fo = _tile((o >= threshold).astype(np.float64), window).mean(axis=(2, 3))
    denom = float(np.sum(fp * fp) + np.sum(fo * fo))
    if denom == 0.0:
        return None
    return 1.0 - float(np.sum((fp - fo) ** 2)) / denom


def _max_pool(binary: np.ndarray, pool: int) -> np.ndarray:
    if pool == 1:
        return binary
    return _tile(binary, pool).max(axis=(2, 3))


def csi(pred, obs, threshold: float) -> Optional[float]:
    """Critical success index hits/(hits+misses+false alarms) on binarized fields."""
    return csi_pooled(pred, obs, threshold, pool=1)


def csi_pooled(pred, obs, threshold: float, pool: int = 1) -> Optional[float]:
    """CSI after max-pooling the binarized fields with kernel = stride = pool.

    Pooling grants tolerance to displacement smaller than the pool size.
    ``pool=1`` is exactly the plain CSI. ``None`` when the contingency table
    is empty on both sides.
    """
    p, o = _check_pair(pred, obs)
    bp = _max_pool(p >= threshold, pool)
    bo = _max_pool(o >= threshold, pool)
    hits = int(np.sum(bp & bo))
    misses = int(np.sum(~bp & bo))
    false_alarms = int(np.sum(bp & ~bo))
    denom = hits + misses + false_alarms
    if denom == 0:
        return None
    return hits / denom


def _gaussian_kernel(window: int, sigma: float) -> np.ndarray:
    half = (window - 1) / 2.0
    coords = np.arange(window) - half
    g = np.exp(-(coords**2) / (2.0 * sigma**2))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def ssim(
    pred,
    obs,
    window: int = 11,
    sigma: float = 1.5,
    k1: float = 0.01,
    k2: float = 0.03,
    data_range: float = 1.0,
) -> float:
    """Single-scale SSIM with a Gaussian window, averaged over the valid region.

    Local means, variances and covariance come from valid-mode convolution
    with an 11x11, sigma 1.5 Gaussian; constants C1 = (k1*L)^2 and
    C2 = (k2*L)^2 with dynamic range L. Result lies in [-1, 1], 1 iff the
    fields are identical.
    """
    p, o = _check_pair(pred, obs)
    if window > min(p.shape):
        raise ShapeError(f"field {p.shape} smaller than ssim window {window}")
    kernel = _gaussian_kernel(window, sigma)

    def smooth(a):
        return fftconvolve(a, kernel, mode="valid")

    mu_p = smooth(p)
    mu_o = smooth(o)
    var_p = smooth(p * p) - mu_p**2
    var_o = smooth(o * o) - mu_o**2
    cov = smooth(p * o) - mu_p * mu_o
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    ssim_map = ((2 * mu_p * mu_o + c1) * (2 * cov + c2)) / (
        (mu_p**2 + mu_o**2 + c1) * (var_p + var_o + c2)
    )
    return float(np.mean(ssim_map))


@dataclass(frozen=True)
class MetricConfig:
    """Which metrics to evaluate and with what parameters."""

    metrics: tuple[str, ...] = ("mae", "mse", "ssim", "fss", "rhd", "csi")
    thresholds: tuple[float, ...] = (0.5,)
    fss_window: int = DEFAULT_WINDOW
    rhd_window: int = DEFAULT_WINDOW
    n_bins: int = DEFAULT_BINS
    eps: float = DEFAULT_EPS
    pool_sizes: tuple[int, ...] = (1, 4, 16)


@dataclass(frozen=True)
class MetricRow:
    sequence: int
    frame: int
    metric: str
    param: str
    value: Optional[float]
    note: str = ""


@dataclass
class MetricReport:
    """Per-frame metric values plus sequence-level aggregates.

    Every configured metric/parameterization appears for every frame; a
    degenerate score keeps its row with ``value=None`` and a note giving the
    skip reason. Aggregates are plain means over the non-skipped frames.
    """

    rows: list[MetricRow] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def aggregates(self) -> dict[tuple[str, str], float]:
        buckets: dict[tuple[str, str], list[float]] = {}
        for row in self.rows:
            if row.value is not None:
                buckets.setdefault((row.metric, row.param), []).append(row.value)
        means = {key: float(np.mean(vals)) for key, vals in buckets.items()}
        # csi_m: mean over the threshold list, one entry per pool size
        pools = sorted({key[1].split("pool=")[1] for key in means if key[0] == "csi"})
        for pool in pools:
            vals = [v for (m, p), v in means.items() if m == "csi" and p.endswith(f"pool={pool}")]
            if vals:
                means[("csi_m", f"pool={pool}")] = float(np.mean(vals))
        return means

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sequence", "frame", "metric", "param", "value", "note"])
            for r in self.rows:
                writer.writerow(
                    [r.sequence, r.frame, r.metric, r.param, "" if r.value is None else repr(r.value), r.note]
                )

    def summary(self) -> str:
        lines = ["metric                         param                          mean"]
        for (metric, param), value in sorted(self.aggregates().items()):
            lines.append(f"{metric:<30} {param:<30} {value:.6f}")
        return "\n".join(lines)


def evaluate_fields(pred, obs, config: MetricConfig, sequence: int = 0, frame: int = 0) -> list[MetricRow]:
    """Evaluate every configured metric on one frame pair."""
    rows: list[MetricRow] = []

    def add(metric, param, value, note=""):
        rows.append(MetricRow(sequence, frame, metric, param, value, note))

    for metric in config.metrics:
        if metric == "mae":
            add("mae", "", float(np.mean(np.abs(np.asarray(pred) - np.asarray(obs)))))
        elif metric == "mse":
            add("mse", "", float(np.mean((np.asarray(pred) - np.asarray(obs)) ** 2)))
        elif metric == "ssim":
            add("ssim", "", ssim(pred, obs))
        elif metric == "fss":
            for thr in config.thresholds:
                value = fss(pred, obs, thr, config.fss_window)
                note = "" if value is not None else "no positives on either side"
                add("fss", f"thr={thr:g},win={config.fss_window}", value, note)
        elif metric == "rhd":
            value, skipped, total = rhd_detailed(
                pred, obs, config.rhd_window, config.n_bins, config.eps
            )
            note = f"skipped {skipped}/{total} empty patches" if skipped else ""
            if value is None:
                note = "all patches empty"
            add("rhd", f"win={config.rhd_window},bins={config.n_bins}", value, note)
        elif metric == "csi":
            for pool in config.pool_sizes:
                for thr in config.thresholds:
                    value = csi_pooled(pred, obs, thr, pool)
                    note = "" if value is not None else "empty contingency table"
                    add("csi", f"thr={thr:g},pool={pool}", value, note)
        else:
            raise ValueError(f"unknown metric {metric!r}")
    return rows


def evaluate_sequences(preds, obs, config: MetricConfig = MetricConfig(), sequence: int = 0) -> MetricReport:
    """Per-frame metrics and aggregates for a pair of (T, M, N) stacks."""
    p = as_sequence(preds, "preds")
    o = as_sequence(obs, "obs")
    if p.shape != o.shape:
        raise ShapeError(f"shape mismatch: preds {p.shape} vs obs {o.shape}")
    report = MetricReport(meta={"frames": p.shape[0], "shape": p.shape[1:], "config": config})
    for t in range(p.shape[0]):
        report.rows.extend(evaluate_fields(p[t], o[t], config, sequence=sequence, frame=t))
    return report
