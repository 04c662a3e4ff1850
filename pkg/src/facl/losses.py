"""Spectral and pixel losses with analytic gradients, plus the FAL/FCL alternation.

Every loss maps a (target, prediction) pair of same-shape fields to a scalar
value and an analytic gradient with respect to the prediction. All gradients
are validated against central finite differences in the test suite; the
analytic forms are:

* FAL  (amplitude loss): mean squared difference of the DFT amplitude
  spectra. Gradient realized through an inverse transform of the amplitude
  residual re-attached to the prediction's phase:

      d FAL / d xhat = -(2 / (M*N)) * Re(IDFT[(|F| - |Fh|) * Fh / |Fh|])

* FCL  (correlation loss): one minus the normalized real cross-correlation
  of the two spectra, range [0, 2]. By unitarity of the transform the
  gradient collapses to an image-space expression:

      d FCL / d xhat = -(x - (sum(x*xh)/sum(xh^2)) * xh) / sqrt(sum(x^2)*sum(xh^2))

  which vanishes identically at xhat = beta*x for any beta > 0.

* FourierL2: plain squared distance between the complex spectra. Exists to
  demonstrate that it is the same number (and the same gradient) as spatial
  MSE; its gradient is nevertheless computed through the spectral route so
  the equivalence test is not a tautology.

The FACL schedule alternates FCL and FAL per step: draw p uniform in [0, 1)
and select FAL when p > P(t), where P decays from 1 to 0 and stays 0 for the
trailing ``alpha`` fraction of training.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import DegenerateInputError, ShapeError
from .spectral import as_field, dft2

FAL = "fal"
FCL = "fcl"
MSE = "mse"
MAE = "mae"
FOURIER_L2 = "fourier_l2"


@dataclass(frozen=True)
class LossEval:
    """A loss value, its gradient w.r.t. the prediction, and the term tag."""

    value: float
    gradient: np.ndarray
    which: str


def _pair(x, xhat) -> tuple[np.ndarray, np.ndarray]:
    a = as_field(x, "x")
    b = as_field(xhat, "xhat")
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: x {a.shape} vs xhat {b.shape}")
    return a, b


def mse(x, xhat) -> LossEval:
    """Mean squared error with gradient 2*(xhat - x)/(M*N)."""
    a, b = _pair(x, xhat)
    d = b - a
    return LossEval(float(np.mean(d * d)), (2.0 / d.size) * d, MSE)


def mae(x, xhat) -> LossEval:
    """Mean absolute error; the gradient uses sign(0) = 0 at ties."""
    a, b = _pair(x, xhat)
    d = b - a
    return LossEval(float(np.mean(np.abs(d))), np.sign(d) / d.size, MAE)


def fourier_l2(x, xhat) -> LossEval:
    """Mean squared distance between the complex spectra.

    Equal to ``mse(x, xhat)`` by Parseval's identity; kept as a separate
    spectral-route computation so the equality can be asserted.
    """
    a, b = _pair(x, xhat)
    diff = dft2(a) - dft2(b)
    value = float(np.mean(np.abs(diff) ** 2))
    grad = (-2.0 / diff.size) * np.fft.ifft2(diff, norm="ortho").real
    return LossEval(value, grad, FOURIER_L2)


def fal(x, xhat) -> LossEval:
    """Amplitude loss: mean squared difference of DFT amplitude spectra.

    Blind to the target's phase, hence invariant under circular translation
    of either argument. Where a prediction coefficient is exactly zero its
    phase is undefined; that bin contributes no gradient (a measure-zero
    non-smooth set, irrelevant to the finite-difference checks).
    """
    a, b = _pair(x, xhat)
    fa = dft2(a)
    fb = dft2(b)
    amp_a = np.abs(fa)
    amp_b = np.abs(fb)
    resid = amp_a - amp_b
    value = float(np.mean(resid * resid))
    unit = np.where(amp_b > 0.0, fb / np.where(amp_b > 0.0, amp_b, 1.0), 0.0)
    grad = (-2.0 / fa.size) * np.fft.ifft2(resid * unit, norm="ortho").real
    return LossEval(value, grad, FAL)


class FalDecomposition(NamedTuple):
    """FAL split into its spatial-L2 and cross-term components.

    Satisfies ``l2 + cross_spatial - cross_spectral == fal(x, xhat).value``.
    At equality the two cross terms are equal (both 2*sum(x^2)/(M*N)) and
    cancel; under pure translation their difference tracks the L2 term.
    """

    l2: float
    cross_spatial: float
    cross_spectral: float

    @property
    def fal_value(self) -> float:
        return self.l2 + self.cross_spatial - self.cross_spectral


def fal_decomposition(x, xhat) -> FalDecomposition:
    """Return (L2, 2*mean(x*xhat), 2*mean(|F|*|Fh|)) for the FAL identity."""
    a, b = _pair(x, xhat)
    l2 = float(np.mean((a - b) ** 2))
    cross_spatial = float(2.0 * np.mean(a * b))
    cross_spectral = float(2.0 * np.mean(np.abs(dft2(a)) * np.abs(dft2(b))))
    return FalDecomposition(l2, cross_spatial, cross_spectral)


def fcl(x, xhat) -> LossEval:
    """Correlation loss, 1 - Re<F, Fh> / sqrt(sum|F|^2 * sum|Fh|^2).

    Value lies in [0, 2]: 0 at xhat = beta*x (beta > 0), 2 at perfect
    anticorrelation. Commutative in its arguments. All-zero inputs leave
    the normalization undefined and are rejected.
    """
    a, b = _pair(x, xhat)
    energy_a = float(np.sum(a * a))
    energy_b = float(np.sum(b * b))
    if energy_a == 0.0 or energy_b == 0.0:
        raise DegenerateInputError("fcl is undefined for an all-zero field")
    fa = dft2(a)
    fb = dft2(b)
    num = float(np.sum((fa * np.conj(fb)).real))
    den = math.sqrt(float(np.sum(np.abs(fa) ** 2)) * float(np.sum(np.abs(fb) ** 2)))
    value = min(max(1.0 - num / den, 0.0), 2.0)
    cross = float(np.sum(a * b))
    grad = -(a - (cross / energy_b) * b) / math.sqrt(energy_a * energy_b)
    return LossEval(value, grad, FCL)


LOSSES: dict[str, Callable[..., LossEval]] = {
    MSE: mse,
    MAE: mae,
    FAL: fal,
    FCL: fcl,
    FOURIER_L2: fourier_l2,
}


def sequence_loss(kind: str, xs, xhats) -> LossEval:
    """Mean per-frame loss over two (T, M, N) stacks, gradient stacked per frame.

    The transform is always per frame (2D), never spatiotemporal. The stacked
    gradient carries the 1/T factor from the mean, so it is the true gradient
    of the reported value.
    """
    from .spectral import as_sequence

    fn = LOSSES[kind]
    a = as_sequence(xs, "xs")
    b = as_sequence(xhats, "xhats")
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    evals = [fn(a[t], b[t]) for t in range(a.shape[0])]
    value = float(np.mean([e.value for e in evals]))
    grad = np.stack([e.gradient for e in evals]) / a.shape[0]
    return LossEval(value, grad, kind)


def sigmoid(z) -> np.ndarray:
    """Elementwise logistic function, output in (0, 1)."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def sigmoid_chain(grad_xhat, xhat) -> np.ndarray:
    """Pull a gradient w.r.t. xhat back through xhat = sigmoid(z)."""
    xhat = np.asarray(xhat, dtype=np.float64)
    return np.asarray(grad_xhat, dtype=np.float64) * xhat * (1.0 - xhat)


@dataclass(frozen=True)
class ScheduleConfig:
    """Alternation schedule: total step count, trailing zero fraction, seed.

    ``alpha`` is the fraction of steps at the end of training where the
    threshold is exactly zero (the amplitude loss is always selected there).
    ``shape`` selects the decay inside [0, (1-alpha)*T]: a cosine half-period
    by default, or a straight line.
    """

    total_steps: int
    alpha: float = 0.2
    seed: int = 0
    shape: str = "cosine"

    def __post_init__(self):
        if self.total_steps < 1:
            raise ValueError(f"total_steps must be >= 1, got {self.total_steps}")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must be in [0, 1), got {self.alpha}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if self.shape not in ("cosine", "linear"):
            raise ValueError(f"unknown schedule shape {self.shape!r}")


def schedule_threshold(t: int, cfg: ScheduleConfig) -> float:
    """Threshold P(t): P(0) = 1, non-increasing, 0 for t >= (1-alpha)*T."""
    if t < 0 or t > cfg.total_steps:
        raise ValueError(f"step {t} outside [0, {cfg.total_steps}]")
    knee = (1.0 - cfg.alpha) * cfg.total_steps
    if t >= knee:
        return 0.0
    if cfg.shape == "cosine":
        return 0.5 * (1.0 + math.cos(math.pi * t / knee))
    return 1.0 - t / knee


class FaclSampler:
    """Per-step random alternation between the correlation and amplitude losses.

    Owns a seeded RNG whose state advances one uniform draw per step, so a
    (seed, step-sequence) pair fully determines the which-sequence. One
    sampler per training stream; not safe to share across threads.
    """

    def __init__(self, cfg: ScheduleConfig):
        self.cfg = cfg
        self._rng = np.random.default_rng(cfg.seed)

    def draw_which(self, t: int) -> str:
        p = self._rng.random()
        return FAL if p > schedule_threshold(t, self.cfg) else FCL

    def step(self, x, xhat, t: int) -> LossEval:
        which = self.draw_which(t)
        return fal(x, xhat) if which == FAL else fcl(x, xhat)


def facl_step(x, xhat, t: int, sampler: FaclSampler) -> LossEval:
    """One alternation step; shorthand for ``sampler.step(x, xhat, t)``."""
    return sampler.step(x, xhat, t)
