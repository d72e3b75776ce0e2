"""Synthesis and spectral estimation of slowly fluctuating T1 series.

The estimator is a plain segment-averaged periodogram: per segment the mean is
removed, the discrete transform taken, and magnitudes squared are averaged
with the single-sided scaling ``2 dt / (L M)``.  Rectangular window, no
overlap.  Synthesis inverts the same convention: independent Gaussian Fourier
amplitudes scaled to the target power law ``alpha * (f / 1 Hz)**beta``, random
phases, inverse transform, shifted to the requested mean and clipped below at
a tenth of it (relaxation times cannot reach zero).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass
class T1Series:
    """T1 samples on a uniform grid, arranged as runs of equal length."""

    dt: float
    values: np.ndarray  # shape (runs, samples_per_run)

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if np.any(self.values <= 0):
            raise ValueError("T1 values must be positive")

    @property
    def n_runs(self) -> int:
        return self.values.shape[0]

    @property
    def samples_per_run(self) -> int:
        return self.values.shape[1]

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def segmented(self, samples_per_run: int) -> "T1Series":
        """Re-chop the flattened series into runs, dropping the remainder."""
        flat = self.flat
        n_runs = flat.size // samples_per_run
        if n_runs < 1:
            raise ValueError("series shorter than one segment")
        return T1Series(self.dt, flat[: n_runs * samples_per_run].reshape(n_runs, -1))


@dataclass
class PsdEstimate:
    """Single-sided PSD at positive frequencies, optionally with a fit."""

    frequencies: np.ndarray
    s_t1: np.ndarray
    fit_alpha: float | None = None
    fit_beta: float | None = None


def synthesize(alpha: float, beta: float, dt: float, n_samples: int, t1_mean: float, seed) -> T1Series:
    """Generate a series whose PSD follows ``alpha * (f / 1 Hz)**beta``."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if not -2.0 < beta <= 0.0:
        raise ValueError("beta must lie in (-2, 0]")
    if t1_mean <= 0:
        raise ValueError("t1_mean must be positive")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    if alpha == 0.0:
        return T1Series(dt, np.full((1, n_samples), t1_mean))
    rng = np.random.default_rng(seed)
    freqs = np.fft.rfftfreq(n_samples, dt)
    spectrum = np.zeros(freqs.size, dtype=complex)
    target = alpha * freqs[1:] ** beta
    # Scaled so the segment-averaged periodogram is unbiased for the target.
    amplitude = np.sqrt(target * n_samples / (2.0 * dt))
    gauss = rng.standard_normal((2, freqs.size - 1))
    spectrum[1:] = amplitude * (gauss[0] + 1j * gauss[1]) / math.sqrt(2.0)
    if n_samples % 2 == 0:
        spectrum[-1] = amplitude[-1] * gauss[0, -1]
    values = np.fft.irfft(spectrum, n_samples) + t1_mean
    values = np.maximum(values, t1_mean / 10.0)
    return T1Series(dt, values.reshape(1, -1))


def estimate_psd(series: T1Series) -> PsdEstimate:
    """Segment-averaged single-sided periodogram of a T1 series."""
    runs = series.values
    n_runs, m = runs.shape
    if m < 2:
        raise ValueError("segments need at least 2 samples")
    delta = runs - runs.mean(axis=1, keepdims=True)
    transformed = np.fft.rfft(delta, axis=1)
    power = (2.0 * series.dt / (n_runs * m)) * np.sum(np.abs(transformed) ** 2, axis=0)
    freqs = np.fft.rfftfreq(m, series.dt)
    return PsdEstimate(frequencies=freqs[1:], s_t1=power[1:])


def fit_powerlaw(psd: PsdEstimate) -> tuple[float, float]:
    """Least-squares power-law fit in log-log space.

    Non-positive bins are excluded; the fitted values are also stored on the
    estimate.  Returns ``(alpha, beta)``.
    """
    mask = (psd.s_t1 > 0) & (psd.frequencies > 0)
    if int(np.count_nonzero(mask)) < 4:
        raise ValueError("need at least 4 positive PSD bins to fit")
    logf = np.log10(psd.frequencies[mask])
    logs = np.log10(psd.s_t1[mask])
    beta, log_alpha = np.polyfit(logf, logs, 1)
    alpha = float(10.0 ** log_alpha)
    psd.fit_alpha = alpha
    psd.fit_beta = float(beta)
    return alpha, float(beta)


def sigma_from_psd(alpha: float, beta: float, f_l: float, f_u: float) -> float:
    """Band-limited standard deviation: sqrt of the integrated power law."""
    if not 0 < f_l < f_u:
        raise ValueError("band must satisfy 0 < f_l < f_u")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if beta == -1.0:
        integral = alpha * math.log(f_u / f_l)
    else:
        k = beta + 1.0
        integral = alpha / k * (f_u**k - f_l**k)
    return math.sqrt(integral)


def series_to_csv(series: T1Series, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", "t1_s"])
        for i, value in enumerate(series.flat):
            writer.writerow([repr(i * series.dt), repr(float(value))])


def series_from_csv(path: str | Path, dt: float | None = None) -> T1Series:
    times, values = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            times.append(float(row["time_s"]))
            values.append(float(row["t1_s"]))
    if dt is None:
        if len(times) < 2:
            raise ValueError("cannot infer dt from fewer than 2 samples")
        dt = times[1] - times[0]
    return T1Series(dt, np.array(values).reshape(1, -1))


def psd_to_csv(psd: PsdEstimate, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["freq_hz", "psd_s2_per_hz"])
        for f, s in zip(psd.frequencies, psd.s_t1):
            writer.writerow([repr(float(f)), repr(float(s))])
