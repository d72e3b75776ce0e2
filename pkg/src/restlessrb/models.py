"""Analytic models for benchmarking error fractions, noise and SNR.

The restless error fraction of a sequence of ``n_cl`` Cliffords is modelled by
composing three per-shot error sources:

* per-Clifford depolarization ``p_c``, accumulated by probabilistic addition,
  which closes to ``(1/2) * (1 - (1 - 2 p_c)**n_cl)``;
* a SPAM error that depends on whether the qubit sits in the ground or the
  excited state while it waits through the readout-and-depletion window, with
  relaxation split at the effective measurement point ``tau_b`` into the
  window (``tau_a`` is the remainder);
* a readout discrimination offset ``p_s_c`` common to both branch states.

Because a single error sends the restless chain back to the state it started
from, the chain is biased toward the noisier branch; the steady-state error
rate is the self-consistent average of the two branch rates rather than their
mean.  Slow T1 fluctuations that are quasi-static within one acquisition but
move between acquisitions inflate the variance of the measured error fraction
above the binomial floor; the total variance is

    var(eps) = p_e (1 - p_e) / N + (N - 1) / N * (d p_e / d T1)**2 * sigma_T1**2

with the derivative evaluated by the exact chain rule through both SPAM
branches and the per-Clifford error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import curve_fit

DEFAULT_TAU_CLIFFORD = 37.5e-9


class FitError(Exception):
    """A model fit failed to converge or produced unusable parameters."""


def t1_limit_fidelity(t1, tau_c=DEFAULT_TAU_CLIFFORD):
    """Average Clifford fidelity of otherwise perfect gates limited by T1.

    ``(3 + 2 exp(-tau_c / 2 T1) + exp(-tau_c / T1)) / 6`` with ``tau_c`` the
    mean duration of one Clifford (1.875 pulse lengths by default).
    """
    t1 = np.asarray(t1, dtype=float)
    if np.any(t1 <= 0):
        raise ValueError("t1 must be positive")
    if tau_c < 0:
        raise ValueError("tau_c must be non-negative")
    x = tau_c / t1
    out = (3.0 + 2.0 * np.exp(-0.5 * x) + np.exp(-x)) / 6.0
    return out if out.ndim else float(out)


def prob_add(a, b):
    """Probabilistic addition of error rates: ``a + b - 2 a b``."""
    _check_prob(a, "a")
    _check_prob(b, "b")
    return a + b - 2.0 * a * b


def prob_mult(k: int, p):
    """k-fold probabilistic addition of ``p``: ``(1 - (1 - 2p)**k) / 2``."""
    if k < 0 or int(k) != k:
        raise ValueError("k must be a non-negative integer")
    _check_prob(p, "p")
    return 0.5 * (1.0 - (1.0 - 2.0 * p) ** k)


def error_rate(p_s, p_c, n_cl: int):
    """Per-shot error rate of ``n_cl`` Cliffords bracketed by SPAM error."""
    _check_prob(p_s, "p_s")
    _check_prob(p_c, "p_c")
    return p_s + prob_mult(n_cl, p_c) * (1.0 - 2.0 * p_s)


def spam_probs(t1: float, cfg) -> tuple[float, float]:
    """SPAM error for the two branch states of the restless chain.

    ``cfg`` supplies ``tau_b``, ``tau_a`` and ``p_s_c``.  Branch 0 (qubit in
    the ground state at the measurement point) errs by relaxing during
    ``tau_b`` after the ideal flip; branch 1 errs by relaxing during the
    ``tau_a`` rest and then surviving ``tau_b``.
    """
    if t1 <= 0:
        raise ValueError("t1 must be positive")
    eb = math.exp(-cfg.tau_b / t1)
    ea = math.exp(-cfg.tau_a / t1)
    p_s_0 = cfg.p_s_c + (1.0 - eb)
    p_s_1 = cfg.p_s_c + (1.0 - ea) * eb
    return p_s_0, p_s_1


def asymmetric_error_rate(p_e_0, p_e_1):
    """Steady-state error rate of a chain with branch-dependent error rates.

    Solves ``f_j = p_e_j f_j + (1 - p_e_{1-j}) (1 - f_j)`` for the occupation
    of each branch and returns the occupation-weighted error rate.
    """
    _check_prob(p_e_0, "p_e_0")
    _check_prob(p_e_1, "p_e_1")
    denom = (1.0 - p_e_0) + (1.0 - p_e_1)
    if denom == 0:
        raise ValueError("degenerate steady state: both branch rates are 1")
    return (p_e_0 * (1.0 - p_e_1) + p_e_1 * (1.0 - p_e_0)) / denom


@dataclass(frozen=True)
class NoiseModelParams:
    """Inputs of the analytic error-rate and noise model."""

    p_pulse: float
    p_s_c: float
    t1_mean: float
    t1_sigma: float
    tau_b: float
    tau_a: float
    tau_c: float = DEFAULT_TAU_CLIFFORD
    n_shots: int = 8000

    def __post_init__(self):
        for name in ("p_pulse", "p_s_c"):
            _check_prob(getattr(self, name), name)
        if self.t1_mean <= 0:
            raise ValueError("t1_mean must be positive")
        if self.t1_sigma < 0:
            raise ValueError("t1_sigma must be non-negative")

    @classmethod
    def from_physics(cls, physics, p_pulse=None, t1_sigma=None, n_shots=8000):
        return cls(
            p_pulse=physics.p_pulse_floor if p_pulse is None else p_pulse,
            p_s_c=physics.p_s_c,
            t1_mean=physics.t1_mean,
            t1_sigma=physics.t1_sigma if t1_sigma is None else t1_sigma,
            tau_b=physics.tau_b,
            tau_a=physics.tau_a,
            tau_c=physics.tau_cl,
            n_shots=n_shots,
        )


def clifford_error(params: NoiseModelParams, t1=None) -> float:
    """Total per-Clifford error: pulse error plus the T1-induced part."""
    t1 = params.t1_mean if t1 is None else t1
    return params.p_pulse + 1.0 - t1_limit_fidelity(t1, params.tau_c)


def restless_error_rate(params: NoiseModelParams, n_cl: int, t1=None) -> float:
    """Mean restless error fraction at a fixed T1 value."""
    t1 = params.t1_mean if t1 is None else t1
    p_c = clifford_error(params, t1)
    p_s_0, p_s_1 = spam_probs(t1, params)
    return asymmetric_error_rate(
        error_rate(p_s_0, p_c, n_cl), error_rate(p_s_1, p_c, n_cl)
    )


def pe_t1_derivative(params: NoiseModelParams, n_cl: int, t1=None) -> float:
    """Exact derivative of the restless error rate with respect to T1.

    Chain rule through the two SPAM branches and the per-Clifford error; both
    routes share the single fluctuating variable T1, so the variance of the
    error rate collapses onto this one scalar derivative.
    """
    t1 = params.t1_mean if t1 is None else t1
    if t1 <= 0:
        raise ValueError("t1 must be positive")
    eb = math.exp(-params.tau_b / t1)
    ea = math.exp(-params.tau_a / t1)
    t1sq = t1 * t1

    p_s = spam_probs(t1, params)
    dps_dt1 = (
        -eb * params.tau_b / t1sq,
        -ea * (params.tau_a / t1sq) * eb + (1.0 - ea) * eb * (params.tau_b / t1sq),
    )

    p_c = clifford_error(params, t1)
    x = params.tau_c / t1
    # d/dT1 of the T1-limited fidelity, negated for the error rate.
    df_dt1 = (params.tau_c / (6.0 * t1sq)) * (math.exp(-0.5 * x) + math.exp(-x))
    dpc_dt1 = -df_dt1

    decay = (1.0 - 2.0 * p_c) ** n_cl
    p_e = tuple(error_rate(ps, p_c, n_cl) for ps in p_s)

    u = p_e[0] + p_e[1] - 2.0 * p_e[0] * p_e[1]
    v = (1.0 - p_e[0]) + (1.0 - p_e[1])
    dpe_dbranch = (
        ((1.0 - 2.0 * p_e[1]) * v + u) / (v * v),
        ((1.0 - 2.0 * p_e[0]) * v + u) / (v * v),
    )

    total = 0.0
    for j in range(2):
        dpej_dps = decay
        dpej_dpc = n_cl * (1.0 - 2.0 * p_c) ** (n_cl - 1) * (1.0 - 2.0 * p_s[j])
        total += dpe_dbranch[j] * (dpej_dps * dps_dt1[j] + dpej_dpc * dpc_dt1)
    return total


def epsilon_mean_and_var(params: NoiseModelParams, p_c: float, n_cl: int) -> tuple[float, float]:
    """Mean and variance of the restless error fraction at ``p_c``.

    ``p_c`` is the total per-Clifford error at the mean T1; the pulse part is
    recovered by subtracting the T1-induced floor.  The variance combines the
    binomial term with the T1-fluctuation term propagated through the exact
    derivative.
    """
    floor = 1.0 - t1_limit_fidelity(params.t1_mean, params.tau_c)
    p_pulse = p_c - floor
    if p_pulse < -1e-12:
        raise ValueError("p_c is below the T1-induced error floor")
    local = replace(params, p_pulse=max(p_pulse, 0.0))
    mean = restless_error_rate(local, n_cl)
    slope = pe_t1_derivative(local, n_cl)
    n = params.n_shots
    var = mean * (1.0 - mean) / n
    var += (n - 1) / n * (slope * params.t1_sigma) ** 2
    return mean, var


@dataclass(frozen=True)
class RBFit:
    """Exponential-decay fit ``1 - eps = A * p_cl**n_cl + B``."""

    a: float
    b: float
    p_cl: float
    f_cl: float
    covariance: np.ndarray
    flags: tuple[str, ...] = ()


def rb_fit(points) -> RBFit:
    """Weighted least-squares fit of the benchmarking decay.

    ``points`` is an iterable of ``(n_cl, epsilon, weight)`` tuples where
    ``weight`` is the standard error of ``epsilon`` (``None`` for plain least
    squares).  The average Clifford fidelity is ``(1 + p_cl) / 2``.
    """
    pts = [tuple(p) for p in points]
    if len({p[0] for p in pts}) < 3:
        raise ValueError("rb_fit needs at least 3 distinct n_cl values")
    n_cl = np.array([p[0] for p in pts], dtype=float)
    y = 1.0 - np.array([p[1] for p in pts], dtype=float)
    sigmas = [p[2] for p in pts]
    sigma = None
    if all(s is not None for s in sigmas):
        sigma = np.array(sigmas, dtype=float)
        sigma = np.maximum(sigma, 1e-12)

    if np.ptp(y) == 0.0:
        # Flat data leaves A and B degenerate; report a unit-fidelity decay.
        return RBFit(0.0, float(y[0]), 1.0, 1.0, np.zeros((3, 3)), ("flat",))

    def model(n, a, b, p):
        return a * p**n + b

    order = np.argsort(n_cl)
    b0 = float(y[order[-1]])
    a0 = max(float(y[order[0]]) - b0, 1e-6)
    p0 = 0.999
    try:
        popt, pcov = curve_fit(
            model,
            n_cl,
            y,
            p0=(a0, b0, p0),
            sigma=sigma,
            absolute_sigma=sigma is not None,
            maxfev=20000,
        )
    except RuntimeError as exc:
        raise FitError(f"benchmarking decay fit did not converge: {exc}") from exc
    a, b, p = (float(v) for v in popt)
    flags = ()
    if not 0.0 <= p <= 1.0:
        flags = ("p_out_of_range",)
        p = min(max(p, 0.0), 1.0)
    return RBFit(a, b, p, 0.5 + 0.5 * p, np.asarray(pcov), flags)


@dataclass(frozen=True)
class SNRScan:
    """Signal, noise and SNR of the restless cost across sequence lengths.

    ``signal`` is oriented positive: the drop in the mean error fraction when
    the per-Clifford infidelity is halved from ``f_a`` to ``f_b``.
    """

    f_a: float
    f_b: float
    n_cl: np.ndarray
    signal: np.ndarray
    noise: np.ndarray
    snr: np.ndarray

    @property
    def argmax_n_cl(self) -> int:
        return int(self.n_cl[int(np.argmax(self.snr))])


def snr_scan(f_a: float, n_cl_grid, params: NoiseModelParams, t1_sigma_per_n_cl=None) -> SNRScan:
    """Scan the halving-detection SNR over sequence lengths.

    The comparison fidelity is ``f_b = (1 + f_a) / 2``.  Noise is the average
    of the modelled standard deviations at the two fidelities.
    ``t1_sigma_per_n_cl`` optionally supplies the T1 scatter relevant to each
    grid point (the scatter a given sequence length actually samples depends
    on its acquisition rate, see :func:`banded_t1_sigma`); by default the
    fixed ``params.t1_sigma`` is used everywhere.
    """
    if not 0.5 < f_a <= 1.0:
        raise ValueError("f_a must lie in (0.5, 1]")
    f_b = 0.5 + 0.5 * f_a
    floor = 1.0 - t1_limit_fidelity(params.t1_mean, params.tau_c)
    p_c_a = max(1.0 - f_a, floor)
    p_c_b = max(1.0 - f_b, floor)
    grid = np.asarray(list(n_cl_grid), dtype=int)
    if t1_sigma_per_n_cl is None:
        sigmas = np.full(grid.size, params.t1_sigma)
    else:
        sigmas = np.broadcast_to(np.asarray(t1_sigma_per_n_cl, dtype=float), (grid.size,))
    signal = np.empty(grid.size)
    noise = np.empty(grid.size)
    for i, n_cl in enumerate(grid):
        local = replace(params, t1_sigma=float(sigmas[i]))
        mean_a, var_a = epsilon_mean_and_var(local, p_c_a, int(n_cl))
        mean_b, var_b = epsilon_mean_and_var(local, p_c_b, int(n_cl))
        signal[i] = mean_a - mean_b
        noise[i] = 0.5 * (math.sqrt(var_a) + math.sqrt(var_b))
    snr = np.divide(signal, noise, out=np.zeros_like(signal), where=noise > 0)
    return SNRScan(f_a, f_b, grid, signal, noise, snr)


def epsilon_table(params: NoiseModelParams, p_c: float, n_cl_grid, t1_sigma_per_n_cl=None):
    """Rows of (n_cl, mean, sigma) of the modelled error fraction.

    The plot-ready form of the model used by the command-line reports.
    """
    grid = np.asarray(list(n_cl_grid), dtype=int)
    if t1_sigma_per_n_cl is None:
        sigmas = np.full(grid.size, params.t1_sigma)
    else:
        sigmas = np.broadcast_to(np.asarray(t1_sigma_per_n_cl, dtype=float), (grid.size,))
    rows = []
    for n_cl, t1_sigma in zip(grid, sigmas):
        local = replace(params, t1_sigma=float(t1_sigma))
        mean, var = epsilon_mean_and_var(local, p_c, int(n_cl))
        rows.append((int(n_cl), mean, math.sqrt(var)))
    return rows


def banded_t1_sigma(psd_alpha: float, psd_beta: float, acquisition_s: float, n_reps: int = 50) -> float:
    """T1 scatter sampled by repeated acquisitions of a given duration.

    Integrates the power-law T1 spectrum between the repetition-campaign rate
    ``1 / (n_reps * acquisition_s)`` and the single-acquisition rate
    ``1 / acquisition_s``.
    """
    from .t1noise import sigma_from_psd

    if acquisition_s <= 0 or n_reps < 2:
        raise ValueError("need a positive acquisition time and at least 2 repetitions")
    return sigma_from_psd(psd_alpha, psd_beta, 1.0 / (n_reps * acquisition_s), 1.0 / acquisition_s)


def _check_prob(value, name: str) -> None:
    arr = np.asarray(value, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"{name} must lie in [0, 1]")
