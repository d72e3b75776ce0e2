"""Stochastic three-level transmon executing benchmarking sequences.

The qubit is a classical Markov chain on the levels {0, 1, 2}.  One shot is:

1. Gate burst.  The ideal sequence maps the computational levels through the
   declared net operation (identity or bit flip).  Each of the ``n_cl`` random
   Cliffords independently depolarizes with probability ``2 * p_flip``
   (resetting the computational state to a uniform level, so the effective
   per-Clifford flip probability is ``p_flip``) and leaks to level 2 with
   probability ``p_leak``.  Level 2 is untouched by further gates.  Because
   each event is independent, the whole burst collapses to two draws: leak
   anywhere with ``1 - (1 - p_leak)**n_cl`` and net flip with
   ``(1 - (1 - 2 p_flip)**n_cl) / 2``, the closed form of the per-Clifford
   chain.  Gate-time relaxation is folded into ``p_flip`` through the
   T1-limited fidelity rather than simulated gate by gate.
2. Relaxation for ``tau_b`` (the effective measurement point inside the
   readout window), with level 2 cascading through level 1 at the same rate.
3. Measurement.  Levels 1 and 2 read out as 1.  The non-T1 SPAM error
   ``p_s_c`` is applied as a state exchange of the computational levels at
   the measurement point, so one discrimination fault enters one shot-to-shot
   correlation, matching the analytic error model.
4. Relaxation for the remaining ``tau_a`` of the readout-and-depletion
   window.  Restless streams carry the resulting level into the next shot;
   conventional streams reset to level 0 (the initialization wait enters the
   timing model only).

A stream is bit-exact reproducible given (seed, inputs); T1 may be a scalar
or a per-shot series.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .cliffords import CliffordSequence, NetOp
from .models import t1_limit_fidelity


class SimulationError(Exception):
    """Invalid simulation input or state."""


class Mode(str, Enum):
    """Acquisition mode: re-initialized shots or a continuous restless chain."""

    CONVENTIONAL = "conventional"
    RESTLESS = "restless"


_NET_FOR_MODE = {Mode.CONVENTIONAL: NetOp.IDENTITY, Mode.RESTLESS: NetOp.BITFLIP}


@dataclass(frozen=True)
class PulseParams:
    """Tunable pulse knobs: the two drive amplitudes and the detuning (Hz)."""

    a_g: float
    a_d: float
    f_detuning: float = 0.0

    def __post_init__(self):
        values = (self.a_g, self.a_d, self.f_detuning)
        if not all(np.isfinite(v) for v in values):
            raise ValueError("pulse parameters must be finite")
        if self.a_g <= 0:
            raise ValueError("a_g must be positive")

    def as_vector(self, n_params: int) -> np.ndarray:
        if n_params == 2:
            return np.array([self.a_g, self.a_d])
        if n_params == 3:
            return np.array([self.a_g, self.a_d, self.f_detuning])
        raise ValueError("n_params must be 2 or 3")


@dataclass(frozen=True)
class QubitState:
    """Classical three-level state."""

    level: int = 0

    def __post_init__(self):
        if self.level not in (0, 1, 2):
            raise ValueError("level must be 0, 1 or 2")


@dataclass
class PhysicsConfig:
    """Physical parameters of the simulated device.

    Times are seconds.  ``tau_b`` defaults to ``4 tau_m / 7`` (the effective
    point inside the measurement at which the state is projected) and
    ``tau_a`` to the rest of the readout-and-depletion window.  The pulse
    error is quadratic around the optimal parameters with residual floors;
    leakage responds quadratically to the derivative-amplitude offset.
    """

    t1_mean: float = 21.4e-6
    t1_sigma: float = 2.44e-6
    psd_alpha: float = 8.4e-13
    psd_beta: float = -0.81
    t1_sample_interval: float = 2.0
    psd_f_low: float = 1.0 / 3.7
    psd_f_high: float = 1.0 / 0.074
    tau_p: float = 20e-9
    tau_cl: float = 37.5e-9
    tau_m: float = 1.0e-6
    tau_ro: float = 4.25e-6
    tau_b: float | None = None
    tau_a: float | None = None
    p_s_c: float = 0.006
    init_wait: float = 184.5e-6
    opt: PulseParams = field(default_factory=lambda: PulseParams(0.5, 0.25, 0.0))
    curvature_g: float = 5.0
    curvature_d: float = 0.05
    curvature_f: float = 5e-14
    leak_curvature: float = 0.02
    p_pulse_floor: float = 2.5e-4
    p_leak_floor: float = 2e-5

    def __post_init__(self):
        if self.tau_b is None:
            self.tau_b = 4.0 * self.tau_m / 7.0
        if self.tau_a is None:
            self.tau_a = self.tau_ro - self.tau_b
        for name in ("t1_mean", "tau_p", "tau_cl", "tau_m", "tau_ro", "tau_b", "tau_a", "t1_sample_interval"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if abs(self.tau_a + self.tau_b - self.tau_ro) > 1e-15:
            raise ValueError("tau_a + tau_b must equal tau_ro")
        for name in ("p_s_c", "p_pulse_floor", "p_leak_floor"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.t1_sigma < 0 or self.init_wait < 0:
            raise ValueError("t1_sigma and init_wait must be non-negative")
        if not 0 < self.psd_f_low < self.psd_f_high:
            raise ValueError("psd band must satisfy 0 < f_low < f_high")


@dataclass(frozen=True)
class ShotStream:
    """Ordered measurement outcomes of one acquisition."""

    bits: np.ndarray
    mode: Mode
    n_cliffords: int
    n_shots: int
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "bits", np.asarray(self.bits, dtype=np.uint8))
        if self.bits.size != self.n_shots:
            raise ValueError("bits length must equal n_shots")


def error_map(p: PulseParams, cfg: PhysicsConfig, t1_now):
    """Per-Clifford flip and leak probabilities at the given pulse parameters.

    Quadratic response around the optimum plus the T1-induced error of one
    average-duration Clifford; both outputs are clamped to their valid range.
    """
    t1 = np.asarray(t1_now, dtype=float)
    if np.any(~np.isfinite(t1)) or np.any(t1 <= 0):
        raise ValueError("t1_now must be positive and finite")
    dg = p.a_g - cfg.opt.a_g
    dd = p.a_d - cfg.opt.a_d
    df = p.f_detuning - cfg.opt.f_detuning
    p_t1 = 1.0 - t1_limit_fidelity(t1, cfg.tau_cl)
    p_flip = (
        cfg.p_pulse_floor
        + cfg.curvature_g * dg * dg
        + cfg.curvature_d * dd * dd
        + cfg.curvature_f * df * df
        + p_t1
    )
    p_leak = cfg.p_leak_floor + cfg.leak_curvature * dd * dd
    return np.clip(p_flip, 0.0, 0.5), np.clip(p_leak, 0.0, 1.0)


def _relax(level: np.ndarray, u: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Amplitude damping over a window of x = t / T1, cascading 2 -> 1 -> 0."""
    stay = np.exp(-x)
    reach1 = stay + x * stay
    from2 = np.where(u < stay, 2, np.where(u < reach1, 1, 0))
    from1 = np.where(u < stay, 1, 0)
    return np.where(level == 2, from2, np.where(level == 1, from1, 0))


def run_stream(
    seq_set: list[CliffordSequence],
    p: PulseParams,
    cfg: PhysicsConfig,
    n_shots: int,
    mode: Mode,
    seed,
    t1=None,
    initial_state: QubitState = QubitState(0),
) -> ShotStream:
    """Simulate ``n_shots`` measurements cycling round-robin through ``seq_set``.

    All sequences must share one length and a net operation consistent with
    the mode.  Per shot the full transition (burst, relaxation, measurement,
    relaxation) is tabulated for each possible entry level from pre-drawn
    randomness, then the chain (or the per-shot reset) selects the realized
    path, which is statistically identical to stepping Clifford by Clifford.
    """
    if not seq_set:
        raise SimulationError("empty sequence set")
    if n_shots < 1:
        raise SimulationError("n_shots must be at least 1")
    mode = Mode(mode)
    n_cl = seq_set[0].n_cliffords
    net = seq_set[0].net_op
    for seq in seq_set:
        if seq.n_cliffords != n_cl or seq.net_op != net:
            raise SimulationError("sequence set mixes lengths or net operations")
    if net is not _NET_FOR_MODE[mode]:
        raise SimulationError(f"{mode.value} streams need net_op={_NET_FOR_MODE[mode].value}")

    t1_arr = np.broadcast_to(
        np.asarray(cfg.t1_mean if t1 is None else t1, dtype=float), (n_shots,)
    )
    p_flip, p_leak = error_map(p, cfg, t1_arr)
    p_flip = np.broadcast_to(np.asarray(p_flip, dtype=float), (n_shots,))
    p_leak = np.broadcast_to(np.asarray(p_leak, dtype=float), (n_shots,))
    p_seq_leak = 1.0 - (1.0 - p_leak) ** n_cl
    p_seq_flip = 0.5 * (1.0 - (1.0 - 2.0 * p_flip) ** n_cl)

    rng = np.random.default_rng(seed)
    u_leak, u_flip, u_b, u_meas, u_a = rng.random((5, n_shots, 3))

    entry = np.arange(3)
    in_sub = entry < 2
    want_flip = 1 if net is NetOp.BITFLIP else 0
    ideal = np.where(in_sub, entry ^ want_flip, 2)
    hit = np.where(u_flip < p_seq_flip[:, None], 1 - ideal, ideal)
    level = np.where(in_sub, np.where(u_leak < p_seq_leak[:, None], 2, hit), 2)

    level = _relax(level, u_b, (cfg.tau_b / t1_arr)[:, None])
    exchanged = (level < 2) & (u_meas < cfg.p_s_c)
    level = np.where(exchanged, 1 - level, level)
    bits_by_entry = (level >= 1).astype(np.uint8)
    next_by_entry = _relax(level, u_a, (cfg.tau_a / t1_arr)[:, None]).astype(np.int8)

    if mode is Mode.CONVENTIONAL:
        bits = bits_by_entry[:, 0].copy()
    else:
        state = int(initial_state.level)
        out = []
        append = out.append
        for row_bits, row_next in zip(bits_by_entry.tolist(), next_by_entry.tolist()):
            append(row_bits[state])
            state = row_next[state]
        bits = np.array(out, dtype=np.uint8)

    return ShotStream(
        bits=bits,
        mode=mode,
        n_cliffords=n_cl,
        n_shots=n_shots,
        seed=seed if isinstance(seed, int) else None,
    )


def simulated_wallclock(
    n_shots: int, n_cliffords: int, mode: Mode, cfg: PhysicsConfig, init_wait: float | None = None
) -> float:
    """Acquisition time of one stream from the per-shot timing budget.

    Every shot costs the readout-and-depletion window plus the Clifford burst;
    conventional shots add the initialization wait.
    """
    if n_shots < 0:
        raise ValueError("n_shots must be non-negative")
    wait = cfg.init_wait if init_wait is None else init_wait
    if wait < 0:
        raise ValueError("init_wait must be non-negative")
    per_shot = cfg.tau_ro + cfg.tau_cl * n_cliffords
    if Mode(mode) is Mode.CONVENTIONAL:
        per_shot += wait
    return n_shots * per_shot


_STREAM_FORMAT = "restlessrb-bitstream"


def write_stream(stream: ShotStream, path: str | Path, config_sha256: str | None = None) -> None:
    """Write a stream as a one-line JSON header followed by packed bits."""
    header = {
        "format": _STREAM_FORMAT,
        "version": 1,
        "mode": stream.mode.value,
        "n_shots": stream.n_shots,
        "n_cliffords": stream.n_cliffords,
        "seed": stream.seed,
        "config_sha256": config_sha256,
    }
    payload = json.dumps(header, sort_keys=True).encode() + b"\n"
    payload += np.packbits(stream.bits).tobytes()
    Path(path).write_bytes(payload)


def read_stream(path: str | Path) -> tuple[ShotStream, dict]:
    """Read a packed-bit stream file; returns the stream and its header."""
    raw = Path(path).read_bytes()
    nl = raw.index(b"\n")
    header = json.loads(raw[:nl].decode())
    if header.get("format") != _STREAM_FORMAT:
        raise SimulationError(f"not a {_STREAM_FORMAT} file")
    n = int(header["n_shots"])
    bits = np.unpackbits(np.frombuffer(raw[nl + 1 :], dtype=np.uint8))[:n]
    stream = ShotStream(
        bits=bits,
        mode=Mode(header["mode"]),
        n_cliffords=int(header["n_cliffords"]),
        n_shots=n,
        seed=header.get("seed"),
    )
    return stream, header
