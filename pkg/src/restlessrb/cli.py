"""Command-line experiment runner with seeded, reproducible outputs.

Subcommands: tuneup, landscape, rb, snr, psd, gst-fcl, timing.  Every data
file (CSV for tables, JSON for summaries) embeds the configuration hash, the
master seed and the tool version; rerunning a command with identical inputs
reproduces the files byte for byte.  Unless --no-plots is given each command
also renders its figure next to the data.

Exit codes: 0 success, 2 configuration error, 3 simulation error, 4 fit error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, plotting
from .cliffords import NetOp, generate_sequence
from .config import ConfigError, ExperimentConfig, derive_seed, load_config
from .cost import epsilon_for_mode
from .gst import clifford_fidelity, load_gateset
from .models import (
    FitError,
    NoiseModelParams,
    banded_t1_sigma,
    epsilon_table,
    rb_fit,
    snr_scan,
    t1_limit_fidelity,
)
from .neldermead import TuneupReport, two_step_tuneup
from .simulator import (
    Mode,
    PhysicsConfig,
    PulseParams,
    SimulationError,
    run_stream,
    simulated_wallclock,
)
from .t1noise import estimate_psd, fit_powerlaw, psd_to_csv, series_to_csv, sigma_from_psd, synthesize

# Seed namespaces, one per command family.
KEY_RB = 1
KEY_LANDSCAPE = 2
KEY_SNR = 3
KEY_TUNEUP = 4
KEY_PSD = 5

# Per-iteration overhead of the tuneup loop outside acquisition (seconds).
BASELINE_SETTINGS_S = 0.09
IMPROVED_SETTINGS_S = 0.001
BASELINE_PROCESSING_S = 0.23
IMPROVED_PROCESSING_S = 0.001
BASELINE_MISC_S = 0.06
IMPROVED_MISC_S = 0.040

DEFAULT_RB_N_CL = (2, 4, 8, 16, 32, 64, 128, 256, 400)

# Tested starting offsets: gaussian amplitude +-6%, derivative amplitude
# halved or doubled, detuning +-250 kHz for three-parameter runs.
START_CONDITIONS_2P = ((1.06, 2.0), (1.06, 0.5), (0.94, 2.0), (0.94, 0.5))
START_CONDITIONS_3P = (
    (1.06, 2.0, 250e3),
    (1.06, 0.5, -250e3),
    (0.94, 2.0, 250e3),
    (0.94, 0.5, -250e3),
    (1.06, 2.0, -250e3),
    (1.06, 0.5, 250e3),
    (0.94, 2.0, -250e3),
    (0.94, 0.5, 250e3),
)


def _net_for_mode(mode: Mode) -> NetOp:
    return NetOp.BITFLIP if mode is Mode.RESTLESS else NetOp.IDENTITY


def build_sequences(cfg: ExperimentConfig, n_cl: int, mode: Mode, key: tuple[int, ...]):
    """The fixed random-sequence pool used by every evaluation of a command."""
    net = _net_for_mode(mode)
    return [
        generate_sequence(derive_seed(cfg.master_seed, *key, j), n_cl, net)
        for j in range(cfg.n_sequences)
    ]


def run_repetitions(
    seq_set,
    params: PulseParams,
    physics: PhysicsConfig,
    shots: int,
    mode: Mode,
    n_reps: int,
    master_seed: int,
    key: tuple[int, ...],
    t1_values=None,
) -> np.ndarray:
    """Error fractions of ``n_reps`` independent streams with derived seeds."""
    eps = np.empty(n_reps)
    for r in range(n_reps):
        t1 = None if t1_values is None else float(t1_values[r])
        stream = run_stream(
            seq_set, params, physics, shots, mode, derive_seed(master_seed, *key, r), t1=t1
        )
        eps[r] = epsilon_for_mode(stream).epsilon
    return eps


def _pmap(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _provenance(cfg: ExperimentConfig, command: str) -> dict:
    return {
        "tool": "restlessrb",
        "version": __version__,
        "command": command,
        "config_sha256": cfg.sha256(),
        "master_seed": cfg.master_seed,
    }


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, cfg: ExperimentConfig, command: str, header, rows) -> None:
    lines = [f"# {k}: {v}" for k, v in _provenance(cfg, command).items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_json(path: Path, cfg: ExperimentConfig, command: str, payload: dict) -> None:
    document = {"provenance": _provenance(cfg, command)}
    document.update(payload)
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Experiment drivers
# ---------------------------------------------------------------------------


def rb_points(
    cfg: ExperimentConfig,
    mode: Mode,
    n_cl_values,
    reps: int,
    params: PulseParams | None = None,
    key: tuple[int, ...] = (KEY_RB,),
) -> list[dict]:
    """Error fraction versus sequence length with repetition error bars."""
    params = cfg.physics.opt if params is None else params
    rows = []
    for n_cl in n_cl_values:
        seqs = build_sequences(cfg, int(n_cl), mode, key + (0, int(n_cl)))
        eps = run_repetitions(
            seqs, params, cfg.physics, cfg.shots, mode, reps, cfg.master_seed, key + (1, int(n_cl))
        )
        mean = float(np.mean(eps))
        sem = float(np.std(eps, ddof=1) / np.sqrt(reps)) if reps > 1 else None
        rows.append({"n_cl": int(n_cl), "epsilon": mean, "epsilon_sem": sem, "reps": reps})
    return rows


def rb_curve(
    cfg: ExperimentConfig,
    mode: Mode,
    n_cl_values,
    reps: int,
    params: PulseParams | None = None,
    key: tuple[int, ...] = (KEY_RB,),
):
    """Benchmarking decay points plus their exponential fit."""
    rows = rb_points(cfg, mode, n_cl_values, reps, params, key)
    fit = rb_fit([(r["n_cl"], r["epsilon"], r["epsilon_sem"]) for r in rows])
    return rows, fit


def landscape_scan(cfg: ExperimentConfig, mode: Mode, n_cl: int, n_g: int, n_d: int,
                   span_g: float, span_d: float, jobs: int = 1):
    """Cost over an amplitude grid; returns grids, the cost map and a summary."""
    opt = cfg.physics.opt
    a_g = np.linspace(opt.a_g * (1.0 - span_g), opt.a_g * (1.0 + span_g), n_g)
    a_d = np.linspace(opt.a_d / span_d, opt.a_d * span_d, n_d)
    seqs = build_sequences(cfg, n_cl, mode, (KEY_LANDSCAPE, 0, n_cl))

    def one(index):
        i, j = index
        params = PulseParams(float(a_g[i]), float(a_d[j]), opt.f_detuning)
        seed = derive_seed(cfg.master_seed, KEY_LANDSCAPE, 1, n_cl, i, j)
        stream = run_stream(seqs, params, cfg.physics, cfg.shots, mode, seed)
        return epsilon_for_mode(stream).epsilon

    indices = [(i, j) for i in range(n_g) for j in range(n_d)]
    flat = _pmap(one, indices, jobs)
    epsilon = np.array(flat).reshape(n_g, n_d)
    imin, jmin = np.unravel_index(int(np.argmin(epsilon)), epsilon.shape)
    acquisition = len(indices) * simulated_wallclock(cfg.shots, n_cl, mode, cfg.physics)
    summary = {
        "mode": mode.value,
        "n_cliffords": n_cl,
        "argmin": {
            "a_g": float(a_g[imin]),
            "a_d": float(a_d[jmin]),
            "epsilon": float(epsilon[imin, jmin]),
            "i": int(imin),
            "j": int(jmin),
        },
        "total_acquisition_s": acquisition,
    }
    return a_g, a_d, epsilon, summary


def banded_sigma_grid(cfg: ExperimentConfig, n_cl_grid, n_reps: int = 50) -> np.ndarray:
    """Band-limited T1 scatter for each sequence length in the grid."""
    return np.array(
        [
            banded_t1_sigma(
                cfg.physics.psd_alpha,
                cfg.physics.psd_beta,
                simulated_wallclock(cfg.shots, int(n_cl), Mode.RESTLESS, cfg.physics),
                n_reps,
            )
            for n_cl in n_cl_grid
        ]
    )


def snr_table(cfg: ExperimentConfig, f_a_values, n_cl_grid, reps: int,
              model_only: bool = False, jobs: int = 1):
    """Model and Monte Carlo signal/noise/SNR rows per (f_a, n_cl)."""
    physics = cfg.physics
    params = NoiseModelParams.from_physics(physics, n_shots=cfg.shots)
    floor = 1.0 - t1_limit_fidelity(physics.t1_mean, physics.tau_cl)
    sigma_grid = banded_sigma_grid(cfg, n_cl_grid, max(reps, 2))
    sigma_of = {int(n): float(s) for n, s in zip(n_cl_grid, sigma_grid)}
    table = []
    for fa_idx, f_a in enumerate(f_a_values):
        scan = snr_scan(f_a, n_cl_grid, params, sigma_grid)
        mc: dict[int, dict] = {}
        if not model_only:
            levels = (max(1.0 - scan.f_a, floor), max(1.0 - scan.f_b, floor))

            def one(n_cl, _levels=levels, _fa_idx=fa_idx):
                stats = []
                seqs = build_sequences(cfg, int(n_cl), Mode.RESTLESS, (KEY_SNR, 0, int(n_cl)))
                for lv, p_c in enumerate(_levels):
                    local = _physics_at_clifford_error(physics, p_c)
                    rng = np.random.default_rng(
                        derive_seed(cfg.master_seed, KEY_SNR, 2, _fa_idx, int(n_cl), lv)
                    )
                    t1_draws = np.maximum(
                        rng.normal(physics.t1_mean, sigma_of[int(n_cl)], reps),
                        physics.t1_mean / 10.0,
                    )
                    eps = run_repetitions(
                        seqs, physics.opt, local, cfg.shots, Mode.RESTLESS, reps,
                        cfg.master_seed, (KEY_SNR, 1, _fa_idx, int(n_cl), lv), t1_draws,
                    )
                    stats.append((float(np.mean(eps)), float(np.std(eps, ddof=1))))
                signal = stats[0][0] - stats[1][0]
                noise = 0.5 * (stats[0][1] + stats[1][1])
                return {
                    "mc_signal": signal,
                    "mc_noise": noise,
                    "mc_snr": signal / noise if noise > 0 else 0.0,
                }

            results = _pmap(one, list(scan.n_cl), jobs)
            mc = {int(n): r for n, r in zip(scan.n_cl, results)}
        for i, n_cl in enumerate(scan.n_cl):
            row = {
                "f_a": f_a,
                "f_b": scan.f_b,
                "n_cl": int(n_cl),
                "model_signal": float(scan.signal[i]),
                "model_noise": float(scan.noise[i]),
                "model_snr": float(scan.snr[i]),
                "mc_signal": None,
                "mc_noise": None,
                "mc_snr": None,
            }
            row.update(mc.get(int(n_cl), {}))
            table.append(row)
    return table


def _physics_at_clifford_error(physics: PhysicsConfig, p_c: float) -> PhysicsConfig:
    """Copy of the physics whose total per-Clifford error at mean T1 is p_c.

    Curvature and leakage are disabled so the operating point is the optimum.
    """
    floor = 1.0 - t1_limit_fidelity(physics.t1_mean, physics.tau_cl)
    p_pulse = p_c - floor
    if p_pulse < -1e-12:
        raise SimulationError("requested fidelity is above the T1 limit")
    local = PhysicsConfig(**{**_physics_dict(physics), "p_pulse_floor": max(p_pulse, 0.0),
                             "p_leak_floor": 0.0, "leak_curvature": 0.0})
    return local


def _physics_dict(physics: PhysicsConfig) -> dict:
    return {
        name: getattr(physics, name)
        for name in (
            "t1_mean", "t1_sigma", "psd_alpha", "psd_beta", "t1_sample_interval",
            "psd_f_low", "psd_f_high", "tau_p", "tau_cl", "tau_m", "tau_ro",
            "tau_b", "tau_a", "p_s_c", "init_wait", "opt", "curvature_g",
            "curvature_d", "curvature_f", "leak_curvature", "p_pulse_floor",
            "p_leak_floor",
        )
    }


def timing_table(cfg: ExperimentConfig, shots: int | None = None, n_cl: int = 300):
    """Per-iteration time budget for both pipelines and modes."""
    shots = cfg.shots if shots is None else shots
    rows = []
    for pipeline in ("baseline", "improved"):
        settings = BASELINE_SETTINGS_S if pipeline == "baseline" else IMPROVED_SETTINGS_S
        processing = BASELINE_PROCESSING_S if pipeline == "baseline" else IMPROVED_PROCESSING_S
        misc = BASELINE_MISC_S if pipeline == "baseline" else IMPROVED_MISC_S
        for mode in (Mode.CONVENTIONAL, Mode.RESTLESS):
            acquisition = simulated_wallclock(shots, n_cl, mode, cfg.physics)
            rows.append(
                {
                    "pipeline": pipeline,
                    "mode": mode.value,
                    "set_parameters_s": settings,
                    "acquisition_s": acquisition,
                    "processing_s": processing,
                    "miscellaneous_s": misc,
                    "total_s": settings + acquisition + processing + misc,
                }
            )
    return rows


def start_params(physics: PhysicsConfig, n_params: int, index: int) -> PulseParams:
    """Starting pulse parameters of the indexed campaign condition."""
    opt = physics.opt
    if n_params == 2:
        m_g, m_d = START_CONDITIONS_2P[index]
        return PulseParams(opt.a_g * m_g, opt.a_d * m_d, opt.f_detuning)
    m_g, m_d, df = START_CONDITIONS_3P[index]
    return PulseParams(opt.a_g * m_g, opt.a_d * m_d, opt.f_detuning + df)


def n_start_conditions(n_params: int) -> int:
    return len(START_CONDITIONS_2P) if n_params == 2 else len(START_CONDITIONS_3P)


def run_tuneup(
    cfg: ExperimentConfig,
    mode: Mode,
    n_params: int,
    start_index: int,
    crb_reps: int = 10,
    crb_n_cl=DEFAULT_RB_N_CL,
) -> TuneupReport:
    """One two-step tuneup plus a closing conventional benchmarking fit."""
    mode = Mode(mode)
    mode_id = 0 if mode is Mode.CONVENTIONAL else 1
    run_seed = derive_seed(cfg.master_seed, KEY_TUNEUP, mode_id, n_params, start_index)
    report = two_step_tuneup(
        cfg.physics,
        start_params(cfg.physics, n_params, start_index),
        mode,
        n_params,
        master_seed=run_seed,
        shots=cfg.shots,
        n_sequences=cfg.n_sequences,
        overhead_s=cfg.optimizer.overhead_s,
        budget_per_step=cfg.optimizer.budget_per_step,
        max_iterations=cfg.optimizer.max_iterations,
        cost_spread_rtol=cfg.optimizer.cost_spread_rtol,
        coefficients=cfg.optimizer.coefficients,
    )
    _, fit = rb_curve(
        cfg,
        Mode.CONVENTIONAL,
        crb_n_cl,
        crb_reps,
        params=report.final_params,
        key=(KEY_TUNEUP, mode_id, n_params, start_index, 9),
    )
    report.crb_fidelity = fit.f_cl
    report.crb_fidelity_err = 0.5 * float(np.sqrt(max(fit.covariance[2, 2], 0.0)))
    return report


def run_campaign(cfg: ExperimentConfig, mode: Mode, n_params: int, jobs: int = 1,
                 crb_reps: int = 10) -> list[TuneupReport]:
    indices = list(range(n_start_conditions(n_params)))
    return _pmap(lambda k: run_tuneup(cfg, mode, n_params, k, crb_reps), indices, jobs)


def psd_pipeline(cfg: ExperimentConfig, n_samples: int, segment: int):
    """Synthesize a T1 series from the configured spectrum and re-estimate it."""
    physics = cfg.physics
    series = synthesize(
        physics.psd_alpha,
        physics.psd_beta,
        physics.t1_sample_interval,
        n_samples,
        physics.t1_mean,
        derive_seed(cfg.master_seed, KEY_PSD, 0),
    )
    segmented = series.segmented(segment)
    psd = estimate_psd(segmented)
    alpha_fit, beta_fit = fit_powerlaw(psd)
    sigma = sigma_from_psd(alpha_fit, beta_fit, physics.psd_f_low, physics.psd_f_high)
    summary = {
        "alpha_input": physics.psd_alpha,
        "beta_input": physics.psd_beta,
        "alpha_fit": alpha_fit,
        "beta_fit": beta_fit,
        "band_hz": [physics.psd_f_low, physics.psd_f_high],
        "sigma_t1_band_s": sigma,
        "n_samples": n_samples,
        "segment": segment,
    }
    return series, psd, summary


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_tuneup(cfg: ExperimentConfig, args, out: Path) -> int:
    mode = Mode(args.mode)
    if args.start == "all":
        indices = list(range(n_start_conditions(args.n_params)))
    else:
        indices = [int(args.start)]
    reports = _pmap(
        lambda k: run_tuneup(cfg, mode, args.n_params, k, args.crb_reps), indices, args.jobs
    )
    for k, report in zip(indices, reports):
        stem = f"tuneup_{mode.value}_{args.n_params}p_start{k}"
        write_json(out / f"{stem}.json", cfg, "tuneup", report.to_dict())
        header = ["iteration", "step", "n_cliffords", "a_g", "a_d", "f_detuning", "epsilon"]
        rows = [[r[h] for h in header] for r in report.trajectory]
        write_csv(out / f"{stem}_trajectory.csv", cfg, "tuneup", header, rows)
        if not args.no_plots:
            plotting.save_tuneup_figure(
                out / f"{stem}_trajectory.png", report.trajectory, report.step_boundaries
            )
        print(
            f"{stem}: F_Cl={report.crb_fidelity:.5f} iterations={report.n_iterations} "
            f"simulated_time={report.simulated_time_s:.1f}s"
        )
    if len(reports) > 1:
        summary = {
            "mode": mode.value,
            "n_params": args.n_params,
            "runs": [f"tuneup_{mode.value}_{args.n_params}p_start{k}.json" for k in indices],
            "mean_crb_fidelity": float(np.mean([r.crb_fidelity for r in reports])),
            "mean_simulated_time_s": float(np.mean([r.simulated_time_s for r in reports])),
            "mean_iterations": float(np.mean([r.n_iterations for r in reports])),
        }
        write_json(out / f"tuneup_{mode.value}_{args.n_params}p_summary.json", cfg, "tuneup", summary)
    return 0


def _cmd_landscape(cfg: ExperimentConfig, args, out: Path) -> int:
    mode = Mode(args.mode)
    a_g, a_d, epsilon, summary = landscape_scan(
        cfg, mode, args.n_cl, args.grid, args.grid, args.span_g, args.span_d_factor, args.jobs
    )
    stem = f"landscape_{mode.value}_ncl{args.n_cl}"
    rows = [
        [float(a_g[i]), float(a_d[j]), float(epsilon[i, j])]
        for i in range(a_g.size)
        for j in range(a_d.size)
    ]
    write_csv(out / f"{stem}.csv", cfg, "landscape", ["a_g", "a_d", "epsilon"], rows)
    write_json(out / f"{stem}.json", cfg, "landscape", summary)
    if not args.no_plots:
        plotting.save_landscape_figure(
            out / f"{stem}.png", a_g, a_d, epsilon,
            summary["argmin"]["a_g"], summary["argmin"]["a_d"], mode.value, args.n_cl,
        )
    print(f"{stem}: argmin at a_g={summary['argmin']['a_g']:.4f} a_d={summary['argmin']['a_d']:.4f}")
    return 0


def _cmd_rb(cfg: ExperimentConfig, args, out: Path) -> int:
    mode = Mode(args.mode)
    stem = f"rb_{mode.value}"
    rows = rb_points(cfg, mode, args.n_cl, args.reps)
    # Raw data lands on disk before the fit so a fit failure cannot lose it.
    header = ["n_cl", "epsilon", "epsilon_sem", "reps"]
    write_csv(out / f"{stem}.csv", cfg, "rb", header, [[r[h] for h in header] for r in rows])
    fit = rb_fit([(r["n_cl"], r["epsilon"], r["epsilon_sem"]) for r in rows])
    write_json(
        out / f"{stem}_fit.json",
        cfg,
        "rb",
        {
            "a": fit.a,
            "b": fit.b,
            "p_cl": fit.p_cl,
            "f_cl": fit.f_cl,
            "flags": list(fit.flags),
            "covariance": [[float(v) for v in row] for row in fit.covariance],
        },
    )
    if not args.no_plots:
        plotting.save_rb_figure(
            out / f"{stem}.png",
            [r["n_cl"] for r in rows],
            [r["epsilon"] for r in rows],
            [r["epsilon_sem"] or 0.0 for r in rows],
            fit,
            mode.value,
        )
    print(f"{stem}: F_Cl={fit.f_cl:.5f}")
    return 0


def _cmd_snr(cfg: ExperimentConfig, args, out: Path) -> int:
    grid = np.unique(np.round(np.logspace(np.log10(2), np.log10(args.n_cl_max), args.n_cl_points)).astype(int))
    table = snr_table(cfg, args.f_a, grid, args.reps, args.model_only, args.jobs)
    header = ["f_a", "f_b", "n_cl", "model_signal", "model_noise", "model_snr",
              "mc_signal", "mc_noise", "mc_snr"]
    write_csv(out / "snr.csv", cfg, "snr",
              header, [[("" if row[h] is None else row[h]) for h in header] for row in table])
    # Plot-ready model evaluations per fidelity level: (n_cl, mean, sigma).
    params = NoiseModelParams.from_physics(cfg.physics, n_shots=cfg.shots)
    floor = 1.0 - t1_limit_fidelity(cfg.physics.t1_mean, cfg.physics.tau_cl)
    sigma_grid = banded_sigma_grid(cfg, grid, max(args.reps, 2))
    model_rows = []
    for f_a in args.f_a:
        for f in (f_a, 0.5 + 0.5 * f_a):
            for n_cl, mean, sigma in epsilon_table(params, max(1.0 - f, floor), grid, sigma_grid):
                model_rows.append([f, n_cl, mean, sigma])
    write_csv(out / "snr_model_epsilon.csv", cfg, "snr",
              ["f_cl", "n_cl", "epsilon_mean", "epsilon_sigma"], model_rows)
    argmax = {}
    for f_a in args.f_a:
        rows = [r for r in table if r["f_a"] == f_a]
        best = max(rows, key=lambda r: r["model_snr"])
        argmax[str(f_a)] = {"n_cl": best["n_cl"], "model_snr": best["model_snr"]}
    write_json(out / "snr_summary.json", cfg, "snr", {"argmax": argmax})
    if not args.no_plots:
        plotting.save_snr_figure(out / "snr.png", table)
    print(f"snr: wrote {len(table)} rows")
    return 0


def _cmd_psd(cfg: ExperimentConfig, args, out: Path) -> int:
    series, psd, summary = psd_pipeline(cfg, args.samples, args.segment)
    series_to_csv(series, out / "t1_series.csv")
    psd_to_csv(psd, out / "psd.csv")
    write_json(out / "psd_fit.json", cfg, "psd", summary)
    if not args.no_plots:
        plotting.save_psd_figure(out / "psd.png", psd.frequencies, psd.s_t1,
                                 psd.fit_alpha, psd.fit_beta)
    print(f"psd: alpha={summary['alpha_fit']:.3e} beta={summary['beta_fit']:.3f}")
    return 0


def _cmd_gst_fcl(cfg: ExperimentConfig, args, out: Path) -> int:
    try:
        gateset = load_gateset(args.gateset)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise SimulationError(f"cannot load gate set: {exc}") from exc
    result = clifford_fidelity(gateset)
    write_json(
        out / "gst_fcl.json",
        cfg,
        "gst-fcl",
        {
            "p_n": [None if np.isnan(p) else p for p in result.p_n],
            "p_cl": result.p_cl,
            "f_cl": result.f_cl,
            "warnings": list(result.warnings),
        },
    )
    print(f"gst-fcl: F_Cl={result.f_cl:.6f}")
    return 0


def _cmd_timing(cfg: ExperimentConfig, args, out: Path) -> int:
    rows = timing_table(cfg)
    write_json(out / "timing.json", cfg, "timing", {"rows": rows})
    header = ["pipeline", "mode", "set_parameters_s", "acquisition_s", "processing_s",
              "miscellaneous_s", "total_s"]
    write_csv(out / "timing.csv", cfg, "timing", header, [[r[h] for h in header] for r in rows])
    if not args.no_plots:
        plotting.save_timing_figure(out / "timing.png", rows)
    for row in rows:
        print(f"{row['pipeline']:9s} {row['mode']:12s} total {row['total_s']:.3f} s")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="restlessrb",
        description="Simulated restless gate tuneup: benchmarking, noise models and optimization.",
    )
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--seed", type=int, help="override the master seed")
    parser.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.RESTLESS.value)
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers")
    parser.add_argument("--out-dir", help="output directory (default from config)")
    parser.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tuneup", help="two-step pulse optimization")
    p.add_argument("--n-params", type=int, choices=(2, 3), default=2)
    p.add_argument("--start", default="all", help="start-condition index or 'all'")
    p.add_argument("--crb-reps", type=int, default=10)
    p.set_defaults(func=_cmd_tuneup)

    p = sub.add_parser("landscape", help="cost over the amplitude plane")
    p.add_argument("--n-cl", type=int, default=300)
    p.add_argument("--grid", type=int, default=21)
    p.add_argument("--span-g", type=float, default=0.06)
    p.add_argument("--span-d-factor", type=float, default=2.0)
    p.set_defaults(func=_cmd_landscape)

    p = sub.add_parser("rb", help="error fraction versus sequence length")
    p.add_argument("--n-cl", type=int, nargs="+", default=list(DEFAULT_RB_N_CL))
    p.add_argument("--reps", type=int, default=10)
    p.set_defaults(func=_cmd_rb)

    p = sub.add_parser("snr", help="halving-detection signal and noise")
    p.add_argument("--f-a", type=float, nargs="+", default=[0.989, 0.996, 0.998])
    p.add_argument("--n-cl-points", type=int, default=16)
    p.add_argument("--n-cl-max", type=int, default=1000)
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--model-only", action="store_true")
    p.set_defaults(func=_cmd_snr)

    p = sub.add_parser("psd", help="T1 spectral synthesis and estimation")
    p.add_argument("--samples", type=int, default=16384)
    p.add_argument("--segment", type=int, default=128)
    p.set_defaults(func=_cmd_psd)

    p = sub.add_parser("gst-fcl", help="Clifford fidelity of a gate-set file")
    p.add_argument("gateset", help="JSON file {label: 16 row-major floats}")
    p.set_defaults(func=_cmd_gst_fcl)

    p = sub.add_parser("timing", help="per-iteration time budget")
    p.set_defaults(func=_cmd_timing)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            cfg.master_seed = args.seed
        if args.out_dir:
            cfg.out_dir = args.out_dir
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        return args.func(cfg, args, out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except FitError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return 4
    except (SimulationError, ValueError) as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
