"""Nelder-Mead simplex minimization and the two-step pulse tuneup protocol.

The optimizer is the standard reflect / expand / contract / shrink simplex
with coefficients (1, 2, 0.5, 0.5), started from a point and per-parameter
step sizes.  It terminates when the vertex cost spread falls below a relative
tolerance of the mean cost AND the simplex extent falls below per-parameter
tolerances, or when the iteration or evaluation budget runs out (flagged, not
fatal).  Cost functions may be noisy; vertices are never re-averaged, exactly
like an experiment that acquires one fresh stream per evaluation.

The tuneup protocol runs two stages on simulated streams: a coarse stage with
80-Clifford sequences and large steps to pull in from far-off starts, then a
fine stage with 300-Clifford sequences and small steps seeded from the first
stage's best point.  Step sizes are fractions of the optimal amplitudes
(-3% / -25% coarse, -1% / -8% fine, plus 100 / 50 kHz when the detuning is
tuned), and the extent tolerance is half the fine steps.  Each evaluation
acquires a fresh stream of N shots over a fixed set of 200 sequences and
accounts simulated wall-clock time (acquisition plus per-iteration overhead).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cliffords import NetOp, generate_sequence
from .cost import epsilon_for_mode
from .simulator import (
    Mode,
    PhysicsConfig,
    PulseParams,
    run_stream,
    simulated_wallclock,
)

DEFAULT_COEFFICIENTS = (1.0, 2.0, 0.5, 0.5)
STEP_N_CLIFFORDS = (80, 300)
# (a_g fraction of optimum, a_d fraction of optimum, detuning step in Hz).
STEP1_SIZES = (-0.03, -0.25, 100e3)
STEP2_SIZES = (-0.01, -0.08, 50e3)
# Per-iteration time not spent acquiring: parameter settings, processing
# and miscellaneous overhead of the improved pipeline.
DEFAULT_OVERHEAD_S = 0.042

START_WINDOW_A_G = 0.065
START_WINDOW_A_D = (0.45, 2.1)
START_WINDOW_DETUNING = 260e3


class _BudgetExhausted(Exception):
    pass


@dataclass
class OptimizerConfig:
    """Start point, steps, budgets and tolerances of one simplex run."""

    initial_point: np.ndarray
    initial_steps: np.ndarray
    max_iterations: int = 500
    max_evaluations: int | None = None
    cost_spread_rtol: float = 1e-2
    extent_tol: np.ndarray | None = None
    coefficients: tuple[float, float, float, float] = DEFAULT_COEFFICIENTS

    def __post_init__(self):
        self.initial_point = np.asarray(self.initial_point, dtype=float)
        self.initial_steps = np.asarray(self.initial_steps, dtype=float)
        if self.initial_point.shape != self.initial_steps.shape:
            raise ValueError("initial_point and initial_steps must have equal shape")
        if np.any(self.initial_steps == 0):
            raise ValueError("initial steps must be nonzero")
        if self.cost_spread_rtol <= 0:
            raise ValueError("cost_spread_rtol must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.extent_tol is not None:
            self.extent_tol = np.asarray(self.extent_tol, dtype=float)
            if np.any(self.extent_tol <= 0):
                raise ValueError("extent tolerances must be positive")


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    n_iterations: int
    n_evaluations: int
    converged: bool
    reason: str
    trajectory: list[tuple[int, np.ndarray, float]]
    best_history: list[float]


def minimize(cost, cfg: OptimizerConfig) -> OptimizeResult:
    """Minimize ``cost`` over the simplex started at the configured point."""
    trajectory: list[tuple[int, np.ndarray, float]] = []
    n_evals = 0

    def evaluate(x: np.ndarray) -> float:
        nonlocal n_evals
        if cfg.max_evaluations is not None and n_evals >= cfg.max_evaluations:
            raise _BudgetExhausted
        value = float(cost(x))
        trajectory.append((n_evals, x.copy(), value))
        n_evals += 1
        return value

    n = cfg.initial_point.size
    vertices = [cfg.initial_point.copy()]
    for i in range(n):
        vertex = cfg.initial_point.copy()
        vertex[i] += cfg.initial_steps[i]
        vertices.append(vertex)
    vertices = np.array(vertices)
    try:
        values = np.array([evaluate(v) for v in vertices])
    except _BudgetExhausted:
        raise ValueError("evaluation budget too small for the initial simplex")
    if not np.all(np.isfinite(values)):
        raise ValueError("cost is not finite on the initial simplex")

    alpha, gamma, rho, shrink = cfg.coefficients
    best_history: list[float] = []
    converged = False
    reason = "max_iterations"
    iteration = 0
    try:
        for iteration in range(1, cfg.max_iterations + 1):
            order = np.argsort(values, kind="stable")
            vertices = vertices[order]
            values = values[order]
            best_history.append(float(values[0]))

            spread = float(values[-1] - values[0])
            mean = float(np.mean(values))
            spread_ok = spread < cfg.cost_spread_rtol * abs(mean) if mean != 0 else spread == 0
            if cfg.extent_tol is None:
                extent_ok = True
            else:
                extent = vertices.max(axis=0) - vertices.min(axis=0)
                extent_ok = bool(np.all(extent < cfg.extent_tol))
            if spread_ok and extent_ok:
                converged = True
                reason = "tolerance"
                break

            centroid = vertices[:-1].mean(axis=0)
            worst = vertices[-1]
            reflected = centroid + alpha * (centroid - worst)
            f_reflected = evaluate(reflected)
            if f_reflected < values[0]:
                expanded = centroid + alpha * gamma * (centroid - worst)
                f_expanded = evaluate(expanded)
                if f_expanded < f_reflected:
                    vertices[-1], values[-1] = expanded, f_expanded
                else:
                    vertices[-1], values[-1] = reflected, f_reflected
            elif f_reflected < values[-2]:
                vertices[-1], values[-1] = reflected, f_reflected
            else:
                if f_reflected < values[-1]:
                    contracted = centroid + rho * (reflected - centroid)
                    f_contracted = evaluate(contracted)
                    accept = f_contracted <= f_reflected
                else:
                    contracted = centroid - rho * (centroid - worst)
                    f_contracted = evaluate(contracted)
                    accept = f_contracted < values[-1]
                if accept:
                    vertices[-1], values[-1] = contracted, f_contracted
                else:
                    for i in range(1, n + 1):
                        vertices[i] = vertices[0] + shrink * (vertices[i] - vertices[0])
                        values[i] = evaluate(vertices[i])
    except _BudgetExhausted:
        reason = "evaluation_budget"

    best = int(np.argmin(values))
    return OptimizeResult(
        x=vertices[best].copy(),
        fun=float(values[best]),
        n_iterations=iteration,
        n_evaluations=n_evals,
        converged=converged,
        reason=reason,
        trajectory=trajectory,
        best_history=best_history,
    )


@dataclass
class TuneupStep:
    """Summary of one optimization stage."""

    n_cliffords: int
    n_evaluations: int
    converged: bool
    reason: str
    best_cost: float
    best_point: np.ndarray


@dataclass
class TuneupReport:
    """Trajectory and outcome of a two-step tuneup run."""

    mode: Mode
    n_params: int
    start: PulseParams
    final_params: PulseParams
    final_cost: float
    n_iterations: int
    simulated_time_s: float
    step_boundaries: list[int]
    steps: list[TuneupStep]
    trajectory: list[dict] = field(default_factory=list)
    crb_fidelity: float | None = None
    crb_fidelity_err: float | None = None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "n_params": self.n_params,
            "start": vars(self.start).copy(),
            "final_params": vars(self.final_params).copy(),
            "final_cost": self.final_cost,
            "n_iterations": self.n_iterations,
            "simulated_time_s": self.simulated_time_s,
            "step_boundaries": self.step_boundaries,
            "steps": [
                {
                    "n_cliffords": s.n_cliffords,
                    "n_evaluations": s.n_evaluations,
                    "converged": s.converged,
                    "reason": s.reason,
                    "best_cost": s.best_cost,
                    "best_point": [float(v) for v in s.best_point],
                }
                for s in self.steps
            ],
            "crb_fidelity": self.crb_fidelity,
            "crb_fidelity_err": self.crb_fidelity_err,
        }


def _params_from_vector(x: np.ndarray, n_params: int, reference: PulseParams) -> PulseParams:
    if n_params == 2:
        return PulseParams(float(x[0]), float(x[1]), reference.f_detuning)
    return PulseParams(float(x[0]), float(x[1]), float(x[2]))


def _check_start_window(start: PulseParams, opt: PulseParams) -> None:
    if abs(start.a_g / opt.a_g - 1.0) > START_WINDOW_A_G:
        raise ValueError("start a_g outside the supported window around the optimum")
    ratio = start.a_d / opt.a_d
    if not START_WINDOW_A_D[0] <= ratio <= START_WINDOW_A_D[1]:
        raise ValueError("start a_d outside the supported window around the optimum")
    if abs(start.f_detuning - opt.f_detuning) > START_WINDOW_DETUNING:
        raise ValueError("start detuning outside the supported window")


def two_step_tuneup(
    physics: PhysicsConfig,
    start: PulseParams,
    mode: Mode,
    n_params: int,
    master_seed: int,
    shots: int = 8000,
    n_sequences: int = 200,
    overhead_s: float = DEFAULT_OVERHEAD_S,
    budget_per_step: int = 300,
    max_iterations: int = 500,
    cost_spread_rtol: float = 1e-2,
    coefficients: tuple[float, float, float, float] = DEFAULT_COEFFICIENTS,
) -> TuneupReport:
    """Run the coarse and fine optimization stages and report the trajectory.

    The cost is the restless or conventional error fraction of a fresh
    N-shot stream per evaluation over a fixed per-stage sequence set.
    """
    mode = Mode(mode)
    if n_params not in (2, 3):
        raise ValueError("n_params must be 2 or 3")
    _check_start_window(start, physics.opt)
    net = NetOp.BITFLIP if mode is Mode.RESTLESS else NetOp.IDENTITY
    opt = physics.opt

    steps_full = [
        np.array([STEP1_SIZES[0] * opt.a_g, STEP1_SIZES[1] * opt.a_d, STEP1_SIZES[2]]),
        np.array([STEP2_SIZES[0] * opt.a_g, STEP2_SIZES[1] * opt.a_d, STEP2_SIZES[2]]),
    ]
    steps = [s[:n_params] for s in steps_full]
    extent_tol = np.abs(steps[1]) / 2.0

    root = np.random.SeedSequence(master_seed)
    trajectory: list[dict] = []
    step_summaries: list[TuneupStep] = []
    step_boundaries: list[int] = []
    total_time = 0.0
    eval_counter = 0

    x = start.as_vector(n_params)
    for stage, n_cl in enumerate(STEP_N_CLIFFORDS):
        seq_seed_root = np.random.SeedSequence(master_seed, spawn_key=(stage, 0))
        seq_seeds = seq_seed_root.generate_state(n_sequences, np.uint64)
        seq_set = [generate_sequence(int(s), n_cl, net) for s in seq_seeds]
        stream_root = np.random.SeedSequence(master_seed, spawn_key=(stage, 1))
        acquisition = simulated_wallclock(shots, n_cl, mode, physics)

        def cost(vec: np.ndarray, _stage=stage, _n_cl=n_cl, _seqs=seq_set, _root=stream_root) -> float:
            nonlocal total_time, eval_counter
            params = _params_from_vector(vec, n_params, opt)
            seed = np.random.SeedSequence(
                _root.entropy, spawn_key=_root.spawn_key + (eval_counter,)
            )
            stream = run_stream(_seqs, params, physics, shots, mode, seed)
            sample = epsilon_for_mode(stream)
            total_time += acquisition + overhead_s
            trajectory.append(
                {
                    "iteration": eval_counter,
                    "step": _stage + 1,
                    "n_cliffords": _n_cl,
                    "a_g": float(params.a_g),
                    "a_d": float(params.a_d),
                    "f_detuning": float(params.f_detuning),
                    "epsilon": sample.epsilon,
                }
            )
            eval_counter += 1
            return sample.epsilon

        result = minimize(
            cost,
            OptimizerConfig(
                initial_point=x,
                initial_steps=steps[stage],
                max_iterations=max_iterations,
                max_evaluations=budget_per_step,
                cost_spread_rtol=cost_spread_rtol,
                extent_tol=extent_tol,
                coefficients=coefficients,
            ),
        )
        step_summaries.append(
            TuneupStep(
                n_cliffords=n_cl,
                n_evaluations=result.n_evaluations,
                converged=result.converged,
                reason=result.reason,
                best_cost=result.fun,
                best_point=result.x.copy(),
            )
        )
        x = result.x
        step_boundaries.append(eval_counter)

    final_params = _params_from_vector(x, n_params, opt)
    return TuneupReport(
        mode=mode,
        n_params=n_params,
        start=start,
        final_params=final_params,
        final_cost=step_summaries[-1].best_cost,
        n_iterations=eval_counter,
        simulated_time_s=total_time,
        step_boundaries=step_boundaries[:-1],
        steps=step_summaries,
        trajectory=trajectory,
    )
