"""Simulator and optimization engine for restless gate tuneup.

The package simulates a three-level transmon running randomized-benchmarking
sequences without re-initialization, evaluates restless and conventional
error-fraction cost functions, runs a two-step Nelder-Mead pulse tuneup, and
provides the matching analytic error, noise and SNR models, T1 power-spectrum
tools, and a tomography-based Clifford-fidelity converter.
"""

__version__ = "0.1.0"

from .cliffords import (
    CliffordElement,
    CliffordSequence,
    NetOp,
    build_group,
    compose,
    decompose,
    generate_sequence,
    recovery,
)
from .config import ConfigError, ExperimentConfig, OptimizerSettings, derive_seed, load_config
from .cost import CostSample, StreamingCost, epsilon_conventional, epsilon_for_mode, epsilon_restless
from .gst import GateSet, GstFidelity, ProcessMatrix, clifford_fidelity, clifford_ptms, ideal_gateset, ideal_ptm
from .models import (
    FitError,
    NoiseModelParams,
    RBFit,
    SNRScan,
    asymmetric_error_rate,
    banded_t1_sigma,
    epsilon_mean_and_var,
    epsilon_table,
    error_rate,
    pe_t1_derivative,
    prob_add,
    prob_mult,
    rb_fit,
    restless_error_rate,
    snr_scan,
    spam_probs,
    t1_limit_fidelity,
)
from .neldermead import OptimizerConfig, OptimizeResult, TuneupReport, minimize, two_step_tuneup
from .simulator import (
    Mode,
    PhysicsConfig,
    PulseParams,
    QubitState,
    ShotStream,
    SimulationError,
    error_map,
    read_stream,
    run_stream,
    simulated_wallclock,
    write_stream,
)
from .t1noise import (
    PsdEstimate,
    T1Series,
    estimate_psd,
    fit_powerlaw,
    sigma_from_psd,
    synthesize,
)

__all__ = [name for name in dir() if not name.startswith("_")]
