"""Error-driven learning rules for the pre-to-post weight matrix.

Two rules share the same local-error signal:

* a continuous delta rule that adds ``kappa * alpha_j * (e_j . E) * a_i``
  to an ideal weight matrix, and
* a discrete variant that only decides, per synapse and per timestep,
  which memristor of the differential pair (if any) receives a single
  fixed-amplitude SET pulse.

The discrete rule skips a timestep entirely when every component of the
local error is at or below a small threshold, so residual error after
the learning phase is gated off cannot keep pulsing the devices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .device import NoiseSpec

__all__ = [
    "PesConfig",
    "MpesConfig",
    "ACTIVITY_FLOOR",
    "pes_update",
    "local_error",
    "mpes_step",
    "apply_pes_continuous",
]

# filtered traces decay asymptotically, so treat anything below this
# (in Hz) as "has not spiked" when binarizing pre-synaptic activity
ACTIVITY_FLOOR = 1e-3


@dataclass(frozen=True)
class PesConfig:
    kappa: float = 1e-4

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")


@dataclass(frozen=True)
class MpesConfig:
    error_threshold: float = 1e-5
    pulse_voltage: float = 0.1
    noise: NoiseSpec = field(default_factory=NoiseSpec)

    def __post_init__(self):
        if self.error_threshold < 0:
            raise ValueError("error_threshold must be >= 0")
        if not 0.0 < self.pulse_voltage <= 1.0:
            raise ValueError("pulse_voltage must lie in (0, 1]")


def local_error(encoders, error):
    """Per-post-neuron error: sign-inverted projection onto each encoder."""
    return -(encoders @ np.asarray(error, dtype=float))


def pes_update(kappa, gains, encoders, error, activities):
    """Weight-delta matrix ``kappa * alpha_j * (e_j . E) * a_i``."""
    return kappa * np.outer(gains * (encoders @ np.asarray(error, dtype=float)), activities)


def apply_pes_continuous(weights, delta):
    """Additive application of a continuous weight update."""
    return weights + delta


def mpes_step(cfg, encoders, error, activities, arr, rng=None):
    """One timestep of the discrete pulse rule.

    Computes the local error, skips the step when no component exceeds
    ``cfg.error_threshold`` in magnitude, and otherwise pulses the
    positive memristor of pair ``(i, j)`` where the update direction is
    positive and the negative memristor where it is negative.  Only
    pairs whose pre-synaptic neuron is active receive a pulse.

    Returns the (n_post, n_pre) pulse polarity matrix (+1 positive
    device pulsed, -1 negative device pulsed, 0 untouched).
    """
    eps = local_error(encoders, error)
    if np.max(np.abs(eps)) <= cfg.error_threshold:
        return np.zeros(arr.shape, dtype=np.int8)
    active = activities > ACTIVITY_FLOOR
    # update direction: sign of -eps for every active pre column
    polarity = np.where(active, -np.sign(eps)[:, None], 0.0).astype(np.int8)
    arr.apply_pulses(polarity, cfg.pulse_voltage, cfg.noise, rng)
    return polarity
