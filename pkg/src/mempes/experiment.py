"""Experiment harness: network assembly, simulation runs, and sweeps.

The simulated network has three spiking ensembles.  A pre-synaptic
ensemble encodes the input signal; a post-synaptic ensemble receives it
through the learned pre x post weight matrix; an error ensemble
receives the post output through fixed identity decoders and the
pre input through fixed decoders solved for minus the target function,
so it represents (post output) - f(input).  After the learning phase a
constant negative current silences the error ensemble and the decoded
error falls below the pulse threshold, freezing the weights for the
test phase.

Runs are pure functions of their configuration: every random stream
(tuning curves, decoder sample points, device initialization, pulse
noise, white signals) is derived from the master seed.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .device import NoiseSpec, PowerLawParams
from .learning import MpesConfig, mpes_step, pes_update
from .nef import LifParams, build_ensemble, lif_step, solve_decoders
from .signals import MetricsReport, SignalSpec, make_signal
from .synapses import init_array

__all__ = [
    "ExperimentConfig",
    "RunResult",
    "build_model",
    "run",
    "sweep_gamma",
    "sweep_noise",
    "sweep_exponent",
    "compare_rules",
    "derive_seed",
    "write_rows_csv",
    "GAMMA_SWEEP_VALUES",
    "NOISE_SWEEP_LEVELS",
    "EXPONENT_SWEEP_VALUES",
]

GAMMA_SWEEP_VALUES = (1e1, 1e2, 1e3, 1e4, 1e5, 1e6)
NOISE_SWEEP_LEVELS = tuple(np.linspace(0.0, 1.0, 11))
EXPONENT_SWEEP_VALUES = tuple(np.linspace(-1.0, -0.01, 21))

_RULES = ("mpes", "pes", "none")
_FUNCTIONS = {"identity": lambda x: x, "square": lambda x: x * x}


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one simulation."""

    n_neurons: int = 10
    dim: int = 3
    function: str = "identity"
    learn_signal: str | SignalSpec = "sine"
    test_signal: str | SignalSpec | None = None
    sim_time: float = 30.0
    learn_time: float = 22.0
    dt: float = 1e-3
    rule: str = "mpes"
    gamma: float = 1e4
    kappa: float = 1e-4
    noise: float = 0.15
    device: PowerLawParams = field(default_factory=PowerLawParams)
    seed: int = 0
    # framework defaults, exposed so their sensitivity can be tested
    tau_syn: float = 0.005
    tau_probe: float = 0.01
    # dimensionless efficacy of the learned connection (post current per
    # weight-weighted Hz of pre activity); calibrated once so the gain
    # sweep's rho/MSE optimum lands at gamma = 1e4
    drive_scale: float = 10.0
    gate_current: float = -20.0
    error_threshold: float = 1e-5
    pulse_voltage: float = 0.1
    max_rates: tuple = (200.0, 400.0)
    intercepts: tuple = (-1.0, 1.0)
    n_eval_points: int = 1000
    regularization: float = 0.1
    record_pulses: bool = False

    def __post_init__(self):
        if self.rule not in _RULES:
            raise ValueError(f"rule must be one of {_RULES}")
        if self.function not in _FUNCTIONS:
            raise ValueError(f"function must be one of {tuple(_FUNCTIONS)}")
        if not self.learn_time < self.sim_time:
            raise ValueError("learn_time must be smaller than sim_time")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.n_neurons < 1 or self.dim < 1:
            raise ValueError("n_neurons and dim must be >= 1")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")


@dataclass
class RunResult:
    """Recorded output of one simulation."""

    config: ExperimentConfig
    seed: int
    metrics: MetricsReport
    t: np.ndarray
    ref_series: np.ndarray  # probe-filtered decoded f(x) from pre
    est_series: np.ndarray  # probe-filtered decoded output from post
    err_series: np.ndarray  # probe-filtered decoded error
    pulses_applied: int
    pulses_skipped: int
    saturations: int
    pulses_after_gate: int
    last_pulse_time: float
    weights_mid: np.ndarray  # snapshot 0.5 s after the gate closes
    weights_final: np.ndarray
    pulse_log: np.ndarray | None = None  # (step, post, pre, polarity) rows


def derive_seed(*parts):
    """Stable 32-bit seed from a tuple of integers."""
    return int(np.random.SeedSequence([int(p) & 0x7FFFFFFF for p in parts]).generate_state(1)[0])


def _resolve_signal(sig, cfg, tag):
    if isinstance(sig, SignalSpec):
        return sig
    return SignalSpec(
        kind=sig,
        dim=cfg.dim,
        period=2.0 * cfg.sim_time,
        seed=derive_seed(cfg.seed, tag),
    )


def resolve_signals(cfg):
    """Learn/test signal specs with seeds derived from the master seed.

    When the test signal is unspecified or names the same kind as the
    learning signal, the learning signal simply continues into the test
    phase (its period, twice the simulation time, guarantees the test
    window is unseen data).  A different kind gets an independent seed.
    """
    learn = _resolve_signal(cfg.learn_signal, cfg, 1001)
    test = cfg.test_signal
    if test is None:
        return learn, learn
    if isinstance(test, SignalSpec):
        return learn, test
    if test == learn.kind:
        return learn, learn
    return learn, _resolve_signal(test, cfg, 1002)


class Model:
    """Assembled network: ensembles, fixed decoders, and learned weights."""

    def __init__(self, cfg):
        self.cfg = cfg
        lif = LifParams()
        ss = [derive_seed(cfg.seed, i) for i in range(6)]
        kw = dict(lif=lif, radius=1.0, max_rates=cfg.max_rates, intercepts=cfg.intercepts)
        self.pre = build_ensemble(cfg.n_neurons, cfg.dim, np.random.default_rng(ss[0]), **kw)
        self.post = build_ensemble(cfg.n_neurons, cfg.dim, np.random.default_rng(ss[1]), **kw)
        self.error = build_ensemble(cfg.n_neurons, cfg.dim, np.random.default_rng(ss[2]), **kw)

        f = _FUNCTIONS[cfg.function]
        self.target = f
        reg = cfg.regularization
        n_pts = cfg.n_eval_points
        # fixed decoded connections, frozen before t = 0
        self.dec_f = solve_decoders(self.pre, f, n_pts, reg, np.random.default_rng(ss[3]))
        self.dec_post = solve_decoders(self.post, lambda x: x, n_pts, reg, np.random.default_rng(ss[4]))
        self.dec_err = solve_decoders(self.error, lambda x: x, n_pts, reg, np.random.default_rng(ss[5]))

        if cfg.rule == "pes":
            self.synapses = None
            self.w_cont = np.zeros((cfg.n_neurons, cfg.n_neurons))
        else:
            self.synapses = init_array(
                cfg.n_neurons,
                cfg.n_neurons,
                cfg.gamma,
                np.random.default_rng(derive_seed(cfg.seed, 100)),
                spread=cfg.noise,
                params=cfg.device,
            )
            self.w_cont = None

    def weights(self):
        return self.w_cont if self.synapses is None else self.synapses.weights_matrix()


def build_model(cfg):
    """Construct the simulation graph for a configuration."""
    return Model(cfg)


def run(cfg, model=None):
    """Simulate one configuration from t = 0 to sim_time.

    Returns a :class:`RunResult` with metrics computed over the test
    window (the part of the run at and after ``learn_time``).  A fresh
    model is built unless one is supplied; a supplied model is consumed
    (its weights are mutated by the learning rule).
    """
    model = build_model(cfg) if model is None else model
    dt = cfg.dt
    n_steps = int(round(cfg.sim_time / dt))
    gate_step = int(round(cfg.learn_time / dt))
    mid_step = min(gate_step + int(round(0.5 / dt)), n_steps - 1)
    t = np.arange(n_steps) * dt

    learn_sig, test_sig = resolve_signals(cfg)
    x_traj = _input_trajectory(t, gate_step, learn_sig, test_sig)

    lif = model.pre.lif
    pre_state = model.pre.new_state()
    post_state = model.post.new_state()
    err_state = model.error.new_state()

    senc_pre = model.pre.scaled_encoders
    senc_err = model.error.scaled_encoders
    bias_pre, bias_post, bias_err = model.pre.biases, model.post.biases, model.error.biases
    # suppression current per error neuron, scaled by its gain so that
    # inhibition dominates any residual represented error
    gate_currents = cfg.gate_current * model.error.gains
    dec_f_t = model.dec_f.T
    dec_post_t = model.dec_post.T
    dec_err_t = model.dec_err.T

    rule = cfg.rule
    syn = model.synapses
    W = model.w_cont if syn is None else syn.weights_matrix()
    a_pre = pre_state.filtered
    enc_post = model.post.encoders
    gains_post = model.post.gains
    kappa_step = cfg.kappa * dt / cfg.n_neurons
    mpes_cfg = MpesConfig(
        error_threshold=cfg.error_threshold,
        pulse_voltage=cfg.pulse_voltage,
        noise=NoiseSpec(fraction=cfg.noise, enabled=cfg.noise > 0),
    )
    rng_pulses = np.random.default_rng(derive_seed(cfg.seed, 200))

    d = cfg.dim
    x_filt = np.zeros(d)
    fhat = np.zeros(d)
    yhat = np.zeros(d)
    ehat = np.zeros(d)
    ref = np.zeros(d)
    est = np.zeros(d)
    errp = np.zeros(d)
    ref_series = np.empty((n_steps, d))
    est_series = np.empty((n_steps, d))
    err_series = np.empty((n_steps, d))

    k5 = np.exp(-dt / cfg.tau_syn)
    c5 = 1.0 - k5
    imp5 = c5 / dt
    k10 = np.exp(-dt / cfg.tau_probe)
    c10 = 1.0 - k10
    imp10 = c10 / dt

    pulses_after_gate = 0
    last_pulse_step = -1
    weights_mid = None
    log = [] if cfg.record_pulses else None

    for k in range(n_steps):
        x_filt *= k5
        x_filt += c5 * x_traj[k]
        j_pre = senc_pre @ x_filt + bias_pre
        spikes_pre = lif_step(pre_state, j_pre, dt, lif)
        a_pre *= k5
        a_pre += imp5 * spikes_pre

        j_post = cfg.drive_scale * (W @ a_pre) + bias_post
        spikes_post = lif_step(post_state, j_post, dt, lif)

        vf = dec_f_t @ spikes_pre
        vy = dec_post_t @ spikes_post
        fhat *= k5
        fhat += imp5 * vf
        yhat *= k5
        yhat += imp5 * vy

        j_err = senc_err @ (yhat - fhat) + bias_err
        if k >= gate_step:
            j_err += gate_currents
        spikes_err = lif_step(err_state, j_err, dt, lif)
        ve = dec_err_t @ spikes_err
        ehat *= k5
        ehat += imp5 * ve

        ref *= k10
        ref += imp10 * vf
        est *= k10
        est += imp10 * vy
        errp *= k10
        errp += imp10 * ve
        ref_series[k] = ref
        est_series[k] = est
        err_series[k] = errp

        if rule == "mpes":
            polarity = mpes_step(mpes_cfg, enc_post, -ehat, a_pre, syn, rng_pulses)
            if polarity.any():
                last_pulse_step = k
                if k >= gate_step:
                    pulses_after_gate += int(np.count_nonzero(polarity))
                if log is not None:
                    pp, ii = np.nonzero(polarity)
                    log.append(
                        np.column_stack(
                            [np.full(pp.shape, k), pp, ii, polarity[pp, ii]]
                        )
                    )
        elif rule == "pes":
            W += pes_update(kappa_step, gains_post, enc_post, -ehat, a_pre)

        if k == mid_step:
            weights_mid = W.copy()
        if k % 1000 == 999 and not np.isfinite(ehat).all():
            raise RuntimeError(f"non-finite network state at t = {t[k]:.3f} s")

    if not (np.isfinite(ref_series).all() and np.isfinite(est_series).all()):
        raise RuntimeError("non-finite probe data; simulation diverged")

    metrics = MetricsReport.from_series(ref_series[gate_step:], est_series[gate_step:])
    return RunResult(
        config=cfg,
        seed=cfg.seed,
        metrics=metrics,
        t=t,
        ref_series=ref_series,
        est_series=est_series,
        err_series=err_series,
        pulses_applied=0 if syn is None else syn.pulses_applied,
        pulses_skipped=0 if syn is None else syn.pulses_skipped,
        saturations=0 if syn is None else syn.saturations,
        pulses_after_gate=pulses_after_gate,
        last_pulse_time=last_pulse_step * dt if last_pulse_step >= 0 else float("nan"),
        weights_mid=weights_mid,
        weights_final=W.copy(),
        pulse_log=None if log is None else (
            np.concatenate(log) if log else np.empty((0, 4), dtype=int)
        ),
    )


def _input_trajectory(t, gate_step, learn_sig, test_sig, chunk=4096):
    """Input samples for every step: learning signal, then test signal."""
    fn_learn = make_signal(learn_sig)
    fn_test = fn_learn if test_sig is learn_sig else make_signal(test_sig)
    out = np.empty((len(t), learn_sig.dim))
    for fn, start, stop in ((fn_learn, 0, gate_step), (fn_test, gate_step, len(t))):
        for lo in range(start, stop, chunk):
            hi = min(lo + chunk, stop)
            out[lo:hi] = fn(t[lo:hi])
    return out


# ---------------------------------------------------------------------------
# sweeps


def _metrics_worker(cfg):
    r = run(cfg)
    return {
        "mse": r.metrics.mse,
        "rho": r.metrics.spearman_rho,
        "pulses": r.pulses_applied,
        "skipped": r.pulses_skipped,
    }


def _run_grid(configs, jobs=None):
    jobs = jobs or os.cpu_count() or 1
    if jobs <= 1 or len(configs) <= 1:
        return [_metrics_worker(c) for c in configs]
    with ProcessPoolExecutor(max_workers=min(jobs, len(configs))) as pool:
        return list(pool.map(_metrics_worker, configs, chunksize=1))


def _aggregate(results):
    mses = np.array([r["mse"] for r in results])
    rhos = np.array([r["rho"] for r in results])
    mean_mse = float(mses.mean())
    mean_rho = float(rhos.mean())
    ratio = mean_rho / mean_mse if mean_mse > 0 else float("nan")
    return mean_mse, mean_rho, ratio


def _sweep(base_cfg, key, values, seeds_per_value, jobs, cfg_for_value):
    rows = []
    for vi, value in enumerate(values):
        configs = [
            replace(cfg_for_value(base_cfg, value), seed=derive_seed(base_cfg.seed, vi, s))
            for s in range(seeds_per_value)
        ]
        mean_mse, mean_rho, ratio = _aggregate(_run_grid(configs, jobs))
        rows.append(
            {key: float(value), "mse": mean_mse, "rho": mean_rho, "ratio": ratio,
             "n_seeds": seeds_per_value}
        )
    best = max(range(len(rows)), key=lambda i: rows[i]["ratio"])
    for i, row in enumerate(rows):
        row["best_ratio"] = int(i == best)
    return rows


def sweep_gamma(base_cfg, values=GAMMA_SWEEP_VALUES, seeds_per_value=20, jobs=None):
    """Mean test metrics per conductance-to-weight gain value."""
    return _sweep(
        base_cfg, "gamma", values, seeds_per_value, jobs,
        lambda cfg, v: replace(cfg, gamma=v),
    )


def sweep_noise(base_cfg, levels=NOISE_SWEEP_LEVELS, seeds_per_level=10, jobs=None):
    """Mean test metrics per parameter-noise level (0 = noiseless)."""
    return _sweep(
        base_cfg, "noise", levels, seeds_per_level, jobs,
        lambda cfg, v: replace(cfg, noise=v),
    )


def sweep_exponent(base_cfg, values=EXPONENT_SWEEP_VALUES, seeds_per_value=10, jobs=None):
    """Mean test metrics per device exponent at the fixed pulse voltage."""
    return _sweep(
        base_cfg, "exponent", values, seeds_per_value, jobs,
        lambda cfg, v: replace(cfg, device=cfg.device.with_exponent(v, cfg.pulse_voltage)),
    )


def compare_rules(
    base_cfg,
    neurons=(10, 100),
    learn_signals=("sine", "white"),
    functions=("identity", "square"),
    test_signals=("sine", "white"),
    seeds_per_cell=20,
    jobs=None,
):
    """Learning-rule comparison over the model grid.

    For every (ensemble size, training signal, target function, test
    signal) cell, runs the continuous noiseless rule, the discrete
    noisy rule, and a no-learning control, and reports mean MSE, rho,
    and their ratio.
    """
    rows = []
    cell_idx = 0
    for n in neurons:
        for learn in learn_signals:
            for fname in functions:
                for test in test_signals:
                    for rule in ("pes", "mpes", "none"):
                        noise = 0.0 if rule == "pes" else base_cfg.noise
                        cfg0 = replace(
                            base_cfg,
                            n_neurons=n,
                            learn_signal=learn,
                            test_signal=test,
                            function=fname,
                            rule=rule,
                            noise=noise,
                        )
                        configs = [
                            replace(cfg0, seed=derive_seed(base_cfg.seed, cell_idx, s))
                            for s in range(seeds_per_cell)
                        ]
                        mean_mse, mean_rho, ratio = _aggregate(_run_grid(configs, jobs))
                        rows.append(
                            {
                                "neurons": n,
                                "learn_signal": learn,
                                "function": fname,
                                "test_signal": test,
                                "rule": rule,
                                "mse": mean_mse,
                                "rho": mean_rho,
                                "ratio": ratio,
                                "n_seeds": seeds_per_cell,
                            }
                        )
                        cell_idx += 1
    return rows


def write_rows_csv(path, rows):
    """Write a list of uniform dicts as CSV."""
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
