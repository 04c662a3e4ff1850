"""Fourier amplitude/correlation losses and verification metrics for field forecasting.

The package covers five concerns:

* :mod:`facl.spectral`    orthonormalized 2D DFT and amplitude/phase splits
* :mod:`facl.losses`      FAL, FCL, the FACL alternation, baselines, gradients
* :mod:`facl.metrics`     RHD, FSS, CSI (plain/pooled), SSIM, report plumbing
* :mod:`facl.datagen`     stochastic moving-digit sequences and corpus I/O
* :mod:`facl.optim`       direct-optimization reconstruction and grad checks
* :mod:`facl.transforms`  distortion sweeps and the metric comparison table
"""

from .errors import DegenerateInputError, DivergenceError, ShapeError
from .losses import (
    FaclSampler,
    LossEval,
    ScheduleConfig,
    facl_step,
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
from .metrics import (
    MetricConfig,
    MetricReport,
    csi,
    csi_pooled,
    evaluate_sequences,
    fss,
    rhd,
    ssim,
)
from .spectral import amplitude, circular_shift, dft2, idft2, phase
from .optim import GradCheckReport, OptRun, OptRunConfig, grad_check, reconstruct
from .transforms import TransformSpec, apply_transform, fal_curve_sweep, metric_transform_table

__version__ = "0.1.0"

__all__ = [
    "DegenerateInputError",
    "DivergenceError",
    "FaclSampler",
    "GradCheckReport",
    "LossEval",
    "MetricConfig",
    "MetricReport",
    "OptRun",
    "OptRunConfig",
    "ScheduleConfig",
    "ShapeError",
    "TransformSpec",
    "amplitude",
    "apply_transform",
    "circular_shift",
    "csi",
    "csi_pooled",
    "dft2",
    "evaluate_sequences",
    "facl_step",
    "fal",
    "fal_curve_sweep",
    "fal_decomposition",
    "fcl",
    "fourier_l2",
    "fss",
    "grad_check",
    "idft2",
    "mae",
    "metric_transform_table",
    "mse",
    "phase",
    "reconstruct",
    "rhd",
    "schedule_threshold",
    "sequence_loss",
    "sigmoid",
    "sigmoid_chain",
    "ssim",
    "__version__",
]
