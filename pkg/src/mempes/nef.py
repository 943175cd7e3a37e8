"""Minimal Neural Engineering Framework substrate.

Vectors are encoded into leaky integrate-and-fire populations through
per-neuron tuning curves (encoder, gain, bias) and recovered by linear
decoders solved offline with regularized least squares on the rate
model.  Spike trains are smoothed with first-order low-pass filters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import lif_kernel

__all__ = [
    "LifParams",
    "Ensemble",
    "EnsembleState",
    "lif_rate",
    "gain_bias_from_tuning",
    "build_ensemble",
    "encode",
    "lif_step",
    "filter_lowpass",
    "solve_decoders",
]


@dataclass(frozen=True)
class LifParams:
    tau_rc: float = 0.02
    tau_ref: float = 0.002

    def __post_init__(self):
        if self.tau_rc <= 0 or self.tau_ref <= 0:
            raise ValueError("LIF time constants must be positive")


def lif_rate(j, lif=LifParams()):
    """Steady-state LIF firing rate (Hz) for input current ``j``.

    Zero at or below the threshold current of 1; above it,
    ``1 / (tau_ref + tau_rc * ln(1 + 1/(j - 1)))``.
    """
    j = np.asarray(j, dtype=float)
    scalar = j.ndim == 0
    j = np.atleast_1d(j)
    out = np.zeros_like(j)
    above = j > 1
    out[above] = 1.0 / (lif.tau_ref + lif.tau_rc * np.log1p(1.0 / (j[above] - 1.0)))
    return float(out[0]) if scalar else out


def gain_bias_from_tuning(max_rate, intercept, lif=LifParams()):
    """Gain and bias so the tuning curve hits ``max_rate`` at unit input
    and crosses threshold at ``intercept``.

    Accepts scalars or arrays.  Rates at or above ``1 / tau_ref`` are
    unreachable for a LIF neuron and raise.
    """
    max_rate = np.asarray(max_rate, dtype=float)
    intercept = np.asarray(intercept, dtype=float)
    if np.any(max_rate <= 0):
        raise ValueError("max_rate must be positive")
    if np.any(max_rate >= 1.0 / lif.tau_ref):
        raise ValueError(f"max_rate must be below 1/tau_ref = {1.0 / lif.tau_ref:g} Hz")
    # current at which the rate equals max_rate
    j_max = 1.0 + 1.0 / np.expm1((1.0 / max_rate - lif.tau_ref) / lif.tau_rc)
    gain = (j_max - 1.0) / (1.0 - intercept)
    bias = 1.0 - gain * intercept
    if max_rate.ndim == 0 and intercept.ndim == 0:
        return float(gain), float(bias)
    return gain, bias


@dataclass(frozen=True)
class Ensemble:
    """Immutable definition of a LIF population representing a vector."""

    n_neurons: int
    dim: int
    encoders: np.ndarray  # (n_neurons, dim), unit rows
    gains: np.ndarray  # (n_neurons,)
    biases: np.ndarray  # (n_neurons,)
    lif: LifParams = LifParams()
    radius: float = 1.0

    def __post_init__(self):
        norms = np.linalg.norm(self.encoders, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-9):
            raise ValueError("encoders must have unit norm")
        if np.any(self.gains <= 0):
            raise ValueError("gains must be positive")
        if self.encoders.shape != (self.n_neurons, self.dim):
            raise ValueError("encoder shape mismatch")

    @property
    def scaled_encoders(self):
        return self.gains[:, None] * self.encoders / self.radius

    def new_state(self):
        n = self.n_neurons
        return EnsembleState(np.zeros(n), np.zeros(n), np.zeros(n))


@dataclass
class EnsembleState:
    """Mutable per-run state of one population."""

    voltage: np.ndarray  # membrane voltages in [0, 1]
    refractory: np.ndarray  # remaining refractory time, seconds
    filtered: np.ndarray  # low-passed spike trains, Hz


def build_ensemble(
    n_neurons,
    dim,
    rng,
    lif=LifParams(),
    radius=1.0,
    max_rates=(200.0, 400.0),
    intercepts=(-1.0, 1.0),
):
    """Randomly tuned ensemble: encoders uniform on the unit sphere,
    max rates and intercepts uniform over the given ranges."""
    enc = rng.standard_normal((n_neurons, dim))
    enc /= np.linalg.norm(enc, axis=1, keepdims=True)
    rates = rng.uniform(*max_rates, size=n_neurons)
    ints = rng.uniform(*intercepts, size=n_neurons)
    gains, biases = gain_bias_from_tuning(rates, ints, lif)
    return Ensemble(n_neurons, dim, enc, gains, biases, lif, radius)


def encode(x, ens):
    """Per-neuron input currents for represented vector ``x``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (ens.dim,):
        raise ValueError(f"expected {ens.dim}-vector, got shape {x.shape}")
    return ens.scaled_encoders @ x + ens.biases


def lif_step(state, currents, dt, lif=LifParams()):
    """Advance the LIF population one timestep of length ``dt``.

    Mutates ``state`` in place and returns a 0/1 float array marking the
    neurons that spiked.  Integration is exponential (exact for constant
    current over the step) and threshold crossings are located within
    the step, so long-run spike rates track :func:`lif_rate` closely
    even at millisecond steps.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    currents = np.ascontiguousarray(currents, dtype=float)
    spikes = np.empty_like(state.voltage)
    lif_kernel(state.voltage, state.refractory, currents, dt, lif.tau_rc, lif.tau_ref, spikes)
    return spikes


def filter_lowpass(previous, new, tau, dt):
    """One step of first-order exponential smoothing.

    Spikes should enter as impulses of magnitude ``1/dt``.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    decay = np.exp(-dt / tau)
    return previous * decay + new * (1.0 - decay)


def solve_decoders(ens, target, n_samples, regularization, rng):
    """Least-squares decoders mapping activities to ``target(x)``.

    Samples points uniformly in the radius-ball, evaluates the rate
    model, and solves ``min |A D - Y|^2 + lambda |D|^2`` with
    ``lambda = (regularization * max activity)^2 * n_samples``.
    """
    points = _ball_samples(n_samples, ens.dim, ens.radius, rng)
    A = lif_rate(points @ ens.scaled_encoders.T + ens.biases, ens.lif)
    a_max = A.max()
    if a_max == 0:
        raise ValueError("ensemble is silent over the sample ball; cannot decode")
    Y = np.asarray([np.atleast_1d(target(x)) for x in points], dtype=float)
    lam = (regularization * a_max) ** 2 * n_samples
    G = A.T @ A
    np.fill_diagonal(G, G.diagonal() + lam)
    return np.linalg.solve(G, A.T @ Y)


def _ball_samples(n, dim, radius, rng):
    x = rng.standard_normal((n, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return radius * x * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / dim)
