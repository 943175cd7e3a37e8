"""Command-line harness for runs, sweeps, and device fitting.

Every subcommand writes delimited output (``metrics.csv`` and friends)
into ``--out`` and, unless ``--no-plots`` is given, renders the
matching figures next to it.  A ``--config`` key-value file can supply
any flag; explicit flags override the file.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import experiment, plots
from .device import (
    fit_power_law,
    load_device_params,
    read_pulse_csv,
    save_device_params,
)
from .experiment import ExperimentConfig, derive_seed, write_rows_csv
from .signals import timeseries_to_csv

_CONFIG_FIELDS = {
    "neurons": ("n_neurons", int),
    "dim": ("dim", int),
    "function": ("function", str),
    "learn_signal": ("learn_signal", str),
    "test_signal": ("test_signal", str),
    "rule": ("rule", str),
    "gamma": ("gamma", float),
    "kappa": ("kappa", float),
    "noise": ("noise", float),
    "seed": ("seed", int),
    "sim_time": ("sim_time", float),
    "learn_time": ("learn_time", float),
    "dt": ("dt", float),
}
_EXTRA_FIELDS = {
    "seeds_per_point": ("seeds_per_point", int),
    "out": ("out", str),
    "jobs": ("jobs", int),
    "device_params": ("device_params", str),
}


def _add_common(parser):
    parser.add_argument("--neurons", type=int, help="neurons per ensemble")
    parser.add_argument("--dim", type=int, help="signal dimensionality")
    parser.add_argument("--function", choices=("identity", "square"))
    parser.add_argument("--learn-signal", choices=("sine", "white"), dest="learn_signal")
    parser.add_argument("--test-signal", choices=("sine", "white"), dest="test_signal")
    parser.add_argument("--rule", choices=("mpes", "pes", "none"))
    parser.add_argument("--gamma", type=float, help="conductance-to-weight gain")
    parser.add_argument("--kappa", type=float, help="continuous-rule learning rate")
    parser.add_argument("--noise", type=float, help="device noise fraction (0.15 = 15%%)")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--sim-time", type=float, dest="sim_time")
    parser.add_argument("--learn-time", type=float, dest="learn_time")
    parser.add_argument("--dt", type=float)
    parser.add_argument("--seeds-per-point", type=int, dest="seeds_per_point")
    parser.add_argument("--jobs", type=int, help="parallel workers for sweeps")
    parser.add_argument("--device-params", dest="device_params", help="device parameter file")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--config", help="key-value file mirroring the flags")
    parser.add_argument("--no-plots", action="store_true", help="skip figure rendering")


def _read_config_file(path):
    values = {}
    known = dict(_CONFIG_FIELDS) | dict(_EXTRA_FIELDS)
    with open(path) as f:
        for line in f:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            for sep in ("=", ":"):
                if sep in line:
                    key, _, raw = line.partition(sep)
                    break
            else:
                key, raw = line.split(None, 1)
            key = key.strip().replace("-", "_")
            if key not in known:
                raise ValueError(f"unknown config key {key!r} in {path}")
            _, cast = known[key]
            values[key] = cast(raw.strip())
    return values


def _merge_settings(args):
    """File values first, explicit flags on top, then defaults."""
    settings = {}
    if args.config:
        settings.update(_read_config_file(args.config))
    for key in list(_CONFIG_FIELDS) + list(_EXTRA_FIELDS):
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            settings[key] = flag_value
    return settings


def _build_config(settings, **overrides):
    kwargs = {}
    for key, (attr, _) in _CONFIG_FIELDS.items():
        if key in settings:
            kwargs[attr] = settings[key]
    if "device_params" in settings:
        kwargs["device"] = load_device_params(settings["device_params"])
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)


def _config_echo(cfg):
    learn, test = experiment.resolve_signals(cfg)
    return {
        "neurons": cfg.n_neurons,
        "dim": cfg.dim,
        "function": cfg.function,
        "learn_signal": learn.kind,
        "test_signal": test.kind,
        "rule": cfg.rule,
        "gamma": cfg.gamma,
        "kappa": cfg.kappa,
        "noise": cfg.noise,
        "sim_time": cfg.sim_time,
        "learn_time": cfg.learn_time,
        "dt": cfg.dt,
        "seed": cfg.seed,
        "device_r_zero": cfg.device.r_zero,
        "device_r_one": cfg.device.r_one,
        "device_a": cfg.device.a,
        "device_b": cfg.device.b,
    }


def _out_dir(args):
    out = Path(args.out or "results")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_floats(text):
    return tuple(float(x) for x in text.split(","))


def cmd_run(args):
    settings = _merge_settings(args)
    cfg = _build_config(settings, record_pulses=args.pulse_log)
    result = experiment.run(cfg)
    out = _out_dir(args)

    row = _config_echo(cfg)
    row.update(
        {
            "mse": result.metrics.mse,
            "rho": result.metrics.spearman_rho,
            "ratio": result.metrics.ratio,
            "pulses": result.pulses_applied,
            "pulses_skipped": result.pulses_skipped,
            "saturations": result.saturations,
        }
    )
    write_rows_csv(out / "metrics.csv", [row])
    timeseries_to_csv(out / "timeseries.csv", result.t, result.ref_series, result.est_series)
    np.savetxt(out / "weights_final.csv", result.weights_final, delimiter=",")
    if args.pulse_log and result.pulse_log is not None:
        np.savetxt(
            out / "pulses.csv",
            result.pulse_log,
            delimiter=",",
            fmt="%d",
            header="timestep,post,pre,polarity",
            comments="",
        )
    if not args.no_plots:
        plots.save_timeseries_figure(result, out / "timeseries.png")
    print(
        f"rule={cfg.rule} neurons={cfg.n_neurons} f={cfg.function} seed={cfg.seed}: "
        f"MSE={result.metrics.mse:.4f} rho={result.metrics.spearman_rho:.4f} "
        f"rho/MSE={result.metrics.ratio:.4f}"
    )
    return 0


def _sweep_command(args, key, default_seeds, sweep_fn, values, logx):
    settings = _merge_settings(args)
    seeds = settings.get("seeds_per_point", default_seeds)
    jobs = settings.get("jobs")
    cfg = _build_config(settings)
    rows = sweep_fn(cfg, values, seeds, jobs) if values is not None else sweep_fn(
        cfg, seeds_per_value=seeds, jobs=jobs
    )
    out = _out_dir(args)
    write_rows_csv(out / "metrics.csv", rows)
    if not args.no_plots:
        plots.save_sweep_figure(rows, key, out / f"sweep_{key}.png", logx=logx)
    best = max(rows, key=lambda r: r["ratio"])
    for row in rows:
        print(
            f"{key}={row[key]:g}: MSE={row['mse']:.4f} rho={row['rho']:.4f} "
            f"rho/MSE={row['ratio']:.4f}" + ("  <- best ratio" if row is best else "")
        )
    return 0


def cmd_sweep_gamma(args):
    values = _parse_floats(args.values) if args.values else None
    return _sweep_command(args, "gamma", 20, experiment.sweep_gamma, values, logx=True)


def cmd_sweep_noise(args):
    values = _parse_floats(args.levels) if args.levels else None
    return _sweep_command(args, "noise", 10, experiment.sweep_noise, values, logx=False)


def cmd_sweep_exponent(args):
    values = _parse_floats(args.values) if args.values else None
    return _sweep_command(args, "exponent", 10, experiment.sweep_exponent, values, logx=False)


def cmd_compare_rules(args):
    settings = _merge_settings(args)
    seeds = settings.get("seeds_per_point", 20)
    jobs = settings.get("jobs")
    cfg = _build_config(settings)
    rows = experiment.compare_rules(
        cfg,
        neurons=tuple(int(x) for x in args.grid_neurons.split(",")),
        learn_signals=tuple(args.grid_learn.split(",")),
        functions=tuple(args.grid_functions.split(",")),
        test_signals=tuple(args.grid_tests.split(",")),
        seeds_per_cell=seeds,
        jobs=jobs,
    )
    out = _out_dir(args)
    write_rows_csv(out / "metrics.csv", rows)
    if not args.no_plots:
        plots.save_compare_figure(rows, out / "compare_rules.png")
    for row in rows:
        print(
            f"{row['neurons']}n {row['learn_signal']}->{row['function']}"
            f" test={row['test_signal']} {row['rule']}: MSE={row['mse']:.4f}"
            f" rho={row['rho']:.4f}"
        )
    return 0


def cmd_fit_device(args):
    series = read_pulse_csv(args.data)
    params = fit_power_law(series, r_zero=args.r_zero)
    out = _out_dir(args)
    save_device_params(params, out / "device_params.txt")
    if not args.no_plots:
        plots.save_fit_figure(series, params, out / "device_fit.png")
    print(
        f"r_zero={params.r_zero:g} r_one={params.r_one:.6g} "
        f"a={params.a:.6g} b={params.b:.6g}"
    )
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="mempes",
        description="Memristor-synapse spiking network: runs, sweeps, device fitting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one configuration")
    _add_common(p)
    p.add_argument("--pulse-log", action="store_true", help="write pulses.csv")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("sweep-gamma", help="sweep the conductance-to-weight gain")
    _add_common(p)
    p.add_argument("--values", help="comma-separated gain values")
    p.set_defaults(fn=cmd_sweep_gamma)

    p = sub.add_parser("sweep-noise", help="sweep the device noise fraction")
    _add_common(p)
    p.add_argument("--levels", help="comma-separated noise fractions in [0, 1]")
    p.set_defaults(fn=cmd_sweep_noise)

    p = sub.add_parser("sweep-exponent", help="sweep the device power-law exponent")
    _add_common(p)
    p.add_argument("--values", help="comma-separated exponents in [-1, 0)")
    p.set_defaults(fn=cmd_sweep_exponent)

    p = sub.add_parser("compare-rules", help="rule comparison over a model grid")
    _add_common(p)
    p.add_argument("--grid-neurons", default="10,100")
    p.add_argument("--grid-learn", default="sine,white")
    p.add_argument("--grid-functions", default="identity,square")
    p.add_argument("--grid-tests", default="sine,white")
    p.set_defaults(fn=cmd_compare_rules)

    p = sub.add_parser("fit-device", help="fit the power law from pulse measurements")
    p.add_argument("--data", required=True, help="CSV with voltage,pulse_number,resistance")
    p.add_argument("--r-zero", type=float, default=200.0, dest="r_zero")
    p.add_argument("--out", help="output directory")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(fn=cmd_fit_device)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
