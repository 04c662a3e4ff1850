"""Orthonormalized 2D discrete Fourier transforms and spectral decompositions.

A field is a 2D real array (rows = height M, columns = width N). Its spectrum
is the complex array of the same shape produced by the symmetric 1/sqrt(M*N)
DFT convention, applied in both directions:

    F[p, q] = (1/sqrt(M*N)) * sum_mn x[m, n] * exp(-2j*pi*(m*p/M + n*q/N))
    x[m, n] = (1/sqrt(M*N)) * sum_pq F[p, q] * exp(+2j*pi*(m*p/M + n*q/N))

With this scaling Parseval's identity reads sum(x**2) == sum(|F|**2) with no
extra factor, which the loss and metric layers rely on. Frequency (p, q)
lives at array index (p, q), DC at (0, 0); nothing is fftshifted. Any field
size is supported, powers of two are not required.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError


def as_field(x, name: str = "field") -> np.ndarray:
    """Validate ``x`` as a finite 2D real field and return it as float64."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2D, got shape {arr.shape}")
    if arr.size == 0:
        raise ShapeError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_spectrum(f, name: str = "spectrum") -> np.ndarray:
    """Validate ``f`` as a finite 2D complex spectrum."""
    arr = np.asarray(f, dtype=np.complex128)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2D, got shape {arr.shape}")
    if arr.size == 0:
        raise ShapeError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_sequence(frames, name: str = "sequence") -> np.ndarray:
    """Validate a stack of fields as a (frames, M, N) float64 array."""
    arr = np.asarray(frames, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[np.newaxis]
    if arr.ndim != 3 or arr.shape[0] == 0 or arr.shape[1] == 0 or arr.shape[2] == 0:
        raise ShapeError(f"{name} must be a non-empty (T, M, N) stack, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def dft2(x) -> np.ndarray:
    """Forward orthonormalized 2D DFT of a real field.

    The FFT backend is rescaled to the symmetric convention (numpy's
    ``norm="ortho"``), so the result matches the direct double sum.
    """
    return np.fft.fft2(as_field(x), norm="ortho")


def idft2_complex(f) -> np.ndarray:
    """Full complex inverse transform, useful for checking imaginary residue."""
    return np.fft.ifft2(as_spectrum(f), norm="ortho")


def idft2(f) -> np.ndarray:
    """Inverse orthonormalized 2D DFT, returning the real part.

    For spectra produced by :func:`dft2` of a real field, the discarded
    imaginary part is pure roundoff (below 1e-9 in magnitude).
    """
    return idft2_complex(f).real


def amplitude(f) -> np.ndarray:
    """Elementwise amplitude sqrt(Re^2 + Im^2) of a spectrum."""
    return np.abs(as_spectrum(f))


def phase(f) -> np.ndarray:
    """Elementwise phase angle of a spectrum, in (-pi, pi].

    Computed with the two-argument arctangent of (Im, Re). Zero coefficients
    report phase 0 by convention.
    """
    return np.angle(as_spectrum(f))


def circular_shift(x, shift_rows: int, shift_cols: int) -> np.ndarray:
    """Circularly shift a field by whole pixels (rows down, columns right)."""
    return np.roll(as_field(x), (shift_rows, shift_cols), axis=(0, 1))
