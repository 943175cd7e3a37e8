"""Power-law model of a pulse-programmed resistive device.

A positive (SET) pulse of amplitude ``v`` volts lowers the device
resistance along

    R(n, v) = r_zero + r_one * n ** (a + b * v)

where ``n`` counts the SET pulses applied so far.  The pulse count is
never stored: it is recovered from the current resistance by inverting
the power law, which is what makes parameter noise affect the effective
step size of each update.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from ._kernels import pulse_kernel

__all__ = [
    "PowerLawParams",
    "NoiseSpec",
    "MemristorState",
    "resistance_after_pulses",
    "pulse_count_from_resistance",
    "apply_set_pulse",
    "pulse_resistances",
    "init_resistance",
    "fit_power_law",
    "load_device_params",
    "save_device_params",
    "read_pulse_csv",
]


@dataclass(frozen=True)
class PowerLawParams:
    """Fitted constants of the SET-pulse resistance law.

    ``r_zero`` is the floor the resistance decays towards (ohms),
    ``r_one`` the amplitude above it (ohms), and ``a + b * v`` the
    (negative) exponent for pulses of amplitude ``v`` volts.
    """

    r_zero: float = 200.0
    r_one: float = 2.3e8
    a: float = -0.093
    b: float = -0.53

    def __post_init__(self):
        if self.r_zero <= 0 or self.r_one <= 0:
            raise ValueError("r_zero and r_one must be positive")
        # the pulse response must decrease resistance at full amplitude;
        # per-voltage validity is checked where a voltage is applied
        if self.a + self.b >= 0:
            raise ValueError("exponent a + b*v must be negative at v = 1")

    def exponent(self, v):
        return self.a + self.b * v

    @property
    def r_max(self):
        """Largest resistance on the law (n = 1)."""
        return self.r_zero + self.r_one

    def with_exponent(self, c, v):
        """Params whose exponent at pulse amplitude ``v`` equals ``c``."""
        return replace(self, a=c - self.b * v)


@dataclass(frozen=True)
class NoiseSpec:
    """Multiplicative Gaussian jitter applied to the law's parameters."""

    fraction: float = 0.15
    enabled: bool = True

    def __post_init__(self):
        if self.fraction < 0:
            raise ValueError("noise fraction must be >= 0")

    @property
    def effective_fraction(self):
        return self.fraction if self.enabled else 0.0


@dataclass
class MemristorState:
    """One simulated device: current resistance plus its law parameters."""

    resistance: float
    params: PowerLawParams = field(default_factory=PowerLawParams)

    def __post_init__(self):
        if self.resistance <= self.params.r_zero:
            raise ValueError("resistance must exceed r_zero")


def _check_voltage(v, params=None):
    if not 0.0 < v <= 1.0:
        raise ValueError(f"pulse amplitude {v} V outside fitted range (0, 1]")
    if params is not None and params.exponent(v) >= 0:
        raise ValueError(f"exponent {params.exponent(v):g} at {v} V is not negative")


def resistance_after_pulses(n, v, params=PowerLawParams()):
    """Resistance after ``n`` SET pulses of amplitude ``v`` volts.

    ``n`` may be a scalar or array of (fractional) pulse counts >= 1.
    """
    _check_voltage(v, params)
    n = np.asarray(n, dtype=float)
    if np.any(n < 1):
        raise ValueError("pulse count must be >= 1")
    r = params.r_zero + params.r_one * n ** params.exponent(v)
    return float(r) if np.isscalar(n) or n.ndim == 0 else r


def pulse_count_from_resistance(r, v, params=PowerLawParams()):
    """Invert the power law: pulse count that produces resistance ``r``."""
    _check_voltage(v, params)
    r = np.asarray(r, dtype=float)
    if np.any(r <= params.r_zero):
        raise ValueError("resistance at or below r_zero is outside the law")
    if np.any(r > params.r_zero + params.r_one):
        raise ValueError("resistance above r_zero + r_one implies n < 1")
    n = ((r - params.r_zero) / params.r_one) ** (1.0 / params.exponent(v))
    return float(n) if r.ndim == 0 else n


def pulse_resistances(r, v, params, fraction, rng):
    """Apply one SET pulse to every resistance in ``r``.

    Each device independently perturbs ``r_zero``, ``r_one`` and the
    exponent by multiplicative Gaussian noise of relative size
    ``fraction`` before inverting the law, stepping the recovered pulse
    count by one, and re-evaluating.  The recovered count is clamped to
    >= 1.  Devices whose perturbed parameters are degenerate (exponent
    >= 0, amplitude <= 0, or resistance at/below the perturbed floor)
    are left unchanged.

    Returns ``(new_resistances, n_skipped)``.
    """
    _check_voltage(v, params)
    r = np.asarray(r, dtype=float)
    flat = np.ascontiguousarray(r.reshape(-1))
    if fraction > 0:
        g = rng.standard_normal((3, flat.size))
    else:
        g = np.empty((3, 0))
    out = np.empty_like(flat)
    skipped = pulse_kernel(
        flat, g, float(fraction), params.r_zero, params.r_one, params.exponent(v), out
    )
    return out.reshape(r.shape), int(skipped)


def apply_set_pulse(state, v, noise=NoiseSpec(), rng=None):
    """Apply one SET pulse to a single device.

    Returns ``(new_state, skipped)``; ``skipped`` is True when a
    pathological noise draw made the update impossible and the state was
    left unchanged.
    """
    fraction = noise.effective_fraction
    if fraction > 0 and rng is None:
        raise ValueError("rng is required when noise is enabled")
    r = np.asarray(state.resistance, dtype=float)
    out, skipped = pulse_resistances(r, v, state.params, fraction, rng)
    return MemristorState(float(out), state.params), bool(skipped)


def init_resistance(rng, base=1e8, spread=0.15, size=None):
    """Random initial resistance, uniform in ``base * [1 - spread, 1 + spread]``."""
    if size is None and spread == 0:
        return float(base)
    r = base * (1.0 + spread * rng.uniform(-1.0, 1.0, size=size))
    return float(r) if size is None else r


def fit_power_law(pulse_series, r_zero=200.0):
    """Fit the SET-pulse law from measured (pulse number, resistance) data.

    ``pulse_series`` is a sequence of ``(voltage, points)`` entries, one
    per SET amplitude, where ``points`` is a sequence of
    ``(pulse_number, resistance)`` pairs.  For each voltage the exponent
    comes from a least-squares line through ``(ln n, ln(R - r_zero))``;
    the per-voltage exponents are then regressed against voltage to give
    the ``a`` and ``b`` constants.  The amplitude ``r_one`` is the
    geometric mean of the per-voltage intercepts.

    The resistance floor ``r_zero`` is not identifiable from log-log
    slopes and must be supplied (default: the fitted device's 200 ohm).
    """
    if len(pulse_series) < 2:
        raise ValueError("need measurements at >= 2 voltages to fit the slope b")
    voltages, exponents, log_amps = [], [], []
    for v, points in pulse_series:
        if len(points) < 3:
            raise ValueError(f"need >= 3 points per voltage, got {len(points)} at {v} V")
        n = np.asarray([p[0] for p in points], dtype=float)
        r = np.asarray([p[1] for p in points], dtype=float)
        if np.any(r <= r_zero):
            raise ValueError("resistances must exceed the presumed r_zero")
        x = np.log(n)
        if np.ptp(x) == 0:
            raise ValueError("all pulse numbers equal: slope is undetermined")
        y = np.log(r - r_zero)
        slope, intercept = np.polyfit(x, y, 1)
        voltages.append(v)
        exponents.append(slope)
        log_amps.append(intercept)
    voltages = np.asarray(voltages, dtype=float)
    if np.ptp(voltages) == 0:
        raise ValueError("all voltages equal: b is undetermined")
    b, a = np.polyfit(voltages, np.asarray(exponents), 1)
    r_one = float(np.exp(np.mean(log_amps)))
    return PowerLawParams(r_zero=r_zero, r_one=r_one, a=float(a), b=float(b))


_PARAM_KEYS = ("r_zero", "r_one", "a", "b")


def save_device_params(params, path):
    """Write params as ``key = value`` lines."""
    with open(path, "w") as f:
        for key in _PARAM_KEYS:
            f.write(f"{key} = {getattr(params, key)!r}\n")


def load_device_params(path):
    """Read a ``key = value`` (or ``key: value``) parameter file."""
    values = {}
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
            key = key.strip()
            if key not in _PARAM_KEYS:
                raise ValueError(f"unknown device parameter {key!r} in {path}")
            values[key] = float(raw.strip())
    missing = [k for k in _PARAM_KEYS if k not in values]
    if missing:
        raise ValueError(f"missing device parameters {missing} in {path}")
    return PowerLawParams(**values)


def read_pulse_csv(path):
    """Read ``voltage,pulse_number,resistance`` rows into a pulse series."""
    groups = {}
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        required = {"voltage", "pulse_number", "resistance"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"{path} must have columns {sorted(required)}")
        for row in reader:
            v = float(row["voltage"])
            groups.setdefault(v, []).append(
                (float(row["pulse_number"]), float(row["resistance"]))
            )
    return [(v, groups[v]) for v in sorted(groups)]
