import numpy as np
import pytest

from restlessrb.cliffords import NetOp, generate_sequence
from restlessrb.cost import epsilon_conventional, epsilon_restless
from restlessrb.models import NoiseModelParams, restless_error_rate, t1_limit_fidelity
from restlessrb.simulator import (
    Mode,
    PhysicsConfig,
    PulseParams,
    SimulationError,
    error_map,
    read_stream,
    run_stream,
    simulated_wallclock,
    write_stream,
)


def _sequences(n_cl, net, n=20, base_seed=0):
    return [generate_sequence(base_seed + i, n_cl, net) for i in range(n)]


def _noiseless_physics(**overrides):
    settings = dict(
        t1_mean=1.0,  # effectively no relaxation on microsecond windows
        p_s_c=0.0,
        p_pulse_floor=0.0,
        p_leak_floor=0.0,
        curvature_g=0.0,
        curvature_d=0.0,
        curvature_f=0.0,
        leak_curvature=0.0,
    )
    settings.update(overrides)
    return PhysicsConfig(**settings)


def test_error_map_at_optimum():
    cfg = PhysicsConfig()
    p_flip, p_leak = error_map(cfg.opt, cfg, cfg.t1_mean)
    expected = cfg.p_pulse_floor + 1.0 - t1_limit_fidelity(cfg.t1_mean, cfg.tau_cl)
    assert p_flip == pytest.approx(expected, rel=1e-12)
    assert p_leak == pytest.approx(cfg.p_leak_floor, rel=1e-12)


def test_error_map_infinite_t1_leaves_floor():
    cfg = PhysicsConfig()
    p_flip, _ = error_map(cfg.opt, cfg, 1e6)
    assert p_flip == pytest.approx(cfg.p_pulse_floor, abs=1e-12)


def test_error_map_quadratic_scaling():
    cfg = PhysicsConfig()
    base, _ = error_map(cfg.opt, cfg, 1e6)
    one, _ = error_map(PulseParams(cfg.opt.a_g + 0.01, cfg.opt.a_d), cfg, 1e6)
    two, _ = error_map(PulseParams(cfg.opt.a_g + 0.02, cfg.opt.a_d), cfg, 1e6)
    assert (two - base) == pytest.approx(4.0 * (one - base), rel=1e-9)


def test_error_map_rejects_nonfinite():
    cfg = PhysicsConfig()
    with pytest.raises(ValueError):
        error_map(cfg.opt, cfg, float("nan"))
    with pytest.raises(ValueError):
        PulseParams(float("inf"), 0.1)


def test_zero_error_restless_alternates():
    cfg = _noiseless_physics()
    seqs = _sequences(10, NetOp.BITFLIP)
    stream = run_stream(seqs, cfg.opt, cfg, 400, Mode.RESTLESS, seed=3)
    expected = (np.arange(400) + 1) % 2  # starts in 0, first flip reads 1
    assert np.array_equal(stream.bits, expected.astype(np.uint8))
    assert epsilon_restless(stream).epsilon == 0.0


def test_zero_error_conventional_reads_zero():
    cfg = _noiseless_physics()
    seqs = _sequences(10, NetOp.IDENTITY)
    stream = run_stream(seqs, cfg.opt, cfg, 400, Mode.CONVENTIONAL, seed=3)
    assert not stream.bits.any()
    assert epsilon_conventional(stream).epsilon == 0.0


def test_certain_leakage_pins_outcomes_high():
    # Leak on the first Clifford of every shot; no relaxation brings it back.
    cfg = _noiseless_physics(p_leak_floor=1.0)
    seqs = _sequences(10, NetOp.BITFLIP)
    n = 256
    stream = run_stream(seqs, cfg.opt, cfg, n, Mode.RESTLESS, seed=5)
    assert stream.bits.all()
    assert epsilon_restless(stream).epsilon == (n - 1) / n


def test_leakage_produces_repeated_outcome_runs():
    # With a net bit flip, any repeated outcome marks an error; leakage events
    # should show up as multi-shot runs of 1s while they persist.
    cfg = _noiseless_physics(t1_mean=21.4e-6, p_leak_floor=0.01)
    seqs = _sequences(50, NetOp.BITFLIP)
    stream = run_stream(seqs, cfg.opt, cfg, 4000, Mode.RESTLESS, seed=11)
    bits = stream.bits
    run_len, best = 0, 0
    for b in bits:
        run_len = run_len + 1 if b else 0
        best = max(best, run_len)
    assert best >= 3


def test_stream_is_bit_exact_reproducible():
    cfg = PhysicsConfig()
    seqs = _sequences(30, NetOp.BITFLIP)
    a = run_stream(seqs, cfg.opt, cfg, 2000, Mode.RESTLESS, seed=17)
    b = run_stream(seqs, cfg.opt, cfg, 2000, Mode.RESTLESS, seed=17)
    assert np.array_equal(a.bits, b.bits)
    c = run_stream(seqs, cfg.opt, cfg, 2000, Mode.RESTLESS, seed=18)
    assert not np.array_equal(a.bits, c.bits)


def test_restless_mean_matches_analytic_model():
    cfg = PhysicsConfig(t1_mean=21.6e-6, p_s_c=0.0, p_leak_floor=0.0)
    params = NoiseModelParams.from_physics(cfg, t1_sigma=0.0)
    n_cl = 80
    model = restless_error_rate(params, n_cl)
    seqs = _sequences(n_cl, NetOp.BITFLIP, n=50)
    eps = []
    for rep in range(30):
        stream = run_stream(seqs, cfg.opt, cfg, 8000, Mode.RESTLESS, seed=1000 + rep)
        eps.append(epsilon_restless(stream).epsilon)
    eps = np.array(eps)
    sem = eps.std(ddof=1) / np.sqrt(eps.size)
    assert abs(eps.mean() - model) < 4 * sem


def test_restless_mean_monotone_in_flip_probability():
    n_cl = 60
    seqs = _sequences(n_cl, NetOp.BITFLIP)
    means = []
    for floor in (0.0, 1e-3, 3e-3, 1e-2):
        cfg = _noiseless_physics(t1_mean=21.4e-6, p_pulse_floor=floor)
        eps = [
            epsilon_restless(
                run_stream(seqs, cfg.opt, cfg, 4000, Mode.RESTLESS, seed=100 + r)
            ).epsilon
            for r in range(8)
        ]
        means.append(np.mean(eps))
    for lo, hi in zip(means, means[1:]):
        assert hi > lo - 5e-3


def test_conventional_decay_recovers_injected_depolarization():
    from restlessrb.models import rb_fit

    p_c = 2e-3
    cfg = _noiseless_physics(t1_mean=21.4e-6, p_pulse_floor=p_c, p_s_c=0.006)
    points = []
    for n_cl in (2, 8, 24, 60, 120, 240, 420):
        seqs = _sequences(n_cl, NetOp.IDENTITY, n=30, base_seed=7 * n_cl)
        eps = [
            epsilon_conventional(
                run_stream(seqs, cfg.opt, cfg, 8000, Mode.CONVENTIONAL, seed=n_cl * 100 + r)
            ).epsilon
            for r in range(6)
        ]
        points.append((n_cl, float(np.mean(eps)), float(np.std(eps, ddof=1) / np.sqrt(6))))
    fit = rb_fit(points)
    injected_p_cl = 1.0 - 2.0 * (p_c + 1.0 - t1_limit_fidelity(cfg.t1_mean, cfg.tau_cl))
    assert fit.p_cl == pytest.approx(injected_p_cl, rel=0.01)


def test_sequence_set_validation():
    cfg = PhysicsConfig()
    with pytest.raises(SimulationError):
        run_stream([], cfg.opt, cfg, 10, Mode.RESTLESS, seed=0)
    seqs = _sequences(10, NetOp.IDENTITY)
    with pytest.raises(SimulationError):
        run_stream(seqs, cfg.opt, cfg, 10, Mode.RESTLESS, seed=0)
    mixed = _sequences(10, NetOp.BITFLIP) + _sequences(11, NetOp.BITFLIP)
    with pytest.raises(SimulationError):
        run_stream(mixed, cfg.opt, cfg, 10, Mode.RESTLESS, seed=0)
    with pytest.raises(SimulationError):
        run_stream(_sequences(10, NetOp.BITFLIP), cfg.opt, cfg, 0, Mode.RESTLESS, seed=0)


def test_wallclock_values():
    cfg = PhysicsConfig()
    assert simulated_wallclock(8000, 300, Mode.RESTLESS, cfg) == pytest.approx(0.124, rel=1e-12)
    assert simulated_wallclock(8000, 300, Mode.CONVENTIONAL, cfg) == pytest.approx(1.60, rel=1e-12)
    assert simulated_wallclock(0, 300, Mode.RESTLESS, cfg) == 0.0
    assert simulated_wallclock(8000, 300, Mode.CONVENTIONAL, cfg, init_wait=0.0) == pytest.approx(
        0.124, rel=1e-12
    )


def test_per_shot_t1_series_accepted():
    cfg = PhysicsConfig()
    seqs = _sequences(20, NetOp.BITFLIP)
    t1 = np.full(500, cfg.t1_mean)
    a = run_stream(seqs, cfg.opt, cfg, 500, Mode.RESTLESS, seed=9, t1=t1)
    b = run_stream(seqs, cfg.opt, cfg, 500, Mode.RESTLESS, seed=9)
    assert np.array_equal(a.bits, b.bits)


def test_stream_file_round_trip(tmp_path):
    cfg = PhysicsConfig()
    seqs = _sequences(15, NetOp.BITFLIP)
    stream = run_stream(seqs, cfg.opt, cfg, 1000, Mode.RESTLESS, seed=23)
    path = tmp_path / "stream.bin"
    write_stream(stream, path, config_sha256="abc123")
    loaded, header = read_stream(path)
    assert np.array_equal(loaded.bits, stream.bits)
    assert loaded.mode is Mode.RESTLESS
    assert loaded.n_cliffords == 15
    assert header["config_sha256"] == "abc123"
    assert header["seed"] == 23


def test_closed_loop_recovers_tuned_fidelity():
    # Physics injected so the total per-Clifford error corresponds to an
    # average Clifford fidelity of 0.9991; the conventional decay fit must
    # recover it within 2e-4.
    from restlessrb.models import rb_fit

    target_f = 0.9991
    t1 = 21.4e-6
    floor = (1.0 - target_f) - (1.0 - t1_limit_fidelity(t1, 37.5e-9))
    cfg = _noiseless_physics(t1_mean=t1, p_pulse_floor=floor, p_s_c=0.006)
    points = []
    for n_cl in (2, 4, 8, 16, 32, 64, 128, 256, 400):
        seqs = _sequences(n_cl, NetOp.IDENTITY, n=30, base_seed=13 * n_cl)
        eps = [
            epsilon_conventional(
                run_stream(seqs, cfg.opt, cfg, 8000, Mode.CONVENTIONAL, seed=n_cl * 37 + r)
            ).epsilon
            for r in range(10)
        ]
        points.append((n_cl, float(np.mean(eps)), float(np.std(eps, ddof=1) / np.sqrt(10))))
    fit = rb_fit(points)
    assert abs(fit.f_cl - target_f) < 2e-4
