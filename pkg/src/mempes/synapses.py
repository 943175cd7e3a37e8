"""Differential memristor pairs and the conductance-to-weight map.

Every network weight is realized by a pair of devices: the normalized
conductances of the "positive" and "negative" memristor are subtracted
and scaled by a gain, so SET pulses on the positive device raise the
weight and pulses on the negative device lower it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .device import MemristorState, NoiseSpec, PowerLawParams, init_resistance, pulse_resistances

__all__ = [
    "SynapsePair",
    "SynapseArray",
    "normalized_conductance",
    "weight",
    "init_array",
    "weights_matrix",
]


@dataclass
class SynapsePair:
    """One positive/negative device pair."""

    m_plus: MemristorState
    m_minus: MemristorState


def normalized_conductance(r, r_min, r_max):
    """Map resistance to conductance normalized over ``[r_min, r_max]``.

    Returns 1 at ``r_min``, 0 at ``r_max``.  Out-of-window resistances
    clamp to the boundary (device saturation).
    """
    if not r_min < r_max:
        raise ValueError("require r_min < r_max")
    r = np.clip(r, r_min, r_max)
    g0 = 1.0 / r_max
    g1 = 1.0 / r_min
    return (1.0 / r - g0) / (g1 - g0)


def weight(pair, gain, r_min, r_max):
    """Network weight of one pair: scaled conductance difference."""
    return gain * (
        normalized_conductance(pair.m_plus.resistance, r_min, r_max)
        - normalized_conductance(pair.m_minus.resistance, r_min, r_max)
    )


@dataclass
class SynapseArray:
    """Fully-connected post x pre array of differential pairs.

    Resistances are stored as two (n_post, n_pre) arrays; the weight
    matrix is cached and refreshed only at entries hit by a pulse.
    Counters track applied pulses, pulses skipped due to degenerate
    noise draws, and conductance-window clamps.
    """

    r_plus: np.ndarray
    r_minus: np.ndarray
    gain: float
    r_min: float
    r_max: float
    params: PowerLawParams = field(default_factory=PowerLawParams)
    pulses_applied: int = 0
    pulses_skipped: int = 0
    saturations: int = 0

    def __post_init__(self):
        if self.r_plus.shape != self.r_minus.shape:
            raise ValueError("pair array shapes must match")
        if not self.r_min < self.r_max:
            raise ValueError("require r_min < r_max")
        self._weights = self._compute_weights(self.r_plus, self.r_minus)

    @property
    def shape(self):
        return self.r_plus.shape

    def _compute_weights(self, rp, rm):
        clamped = ((rp < self.r_min) | (rp > self.r_max)).sum()
        clamped += ((rm < self.r_min) | (rm > self.r_max)).sum()
        self.saturations += int(clamped)
        return self.gain * (
            normalized_conductance(rp, self.r_min, self.r_max)
            - normalized_conductance(rm, self.r_min, self.r_max)
        )

    def weights_matrix(self):
        """Current (n_post, n_pre) weight matrix.

        Returns the cached array; callers that store it should copy.
        """
        return self._weights

    def pair(self, post, pre):
        return SynapsePair(
            MemristorState(float(self.r_plus[post, pre]), self.params),
            MemristorState(float(self.r_minus[post, pre]), self.params),
        )

    def apply_pulses(self, polarity, v, noise=NoiseSpec(), rng=None):
        """Apply one SET pulse per nonzero entry of ``polarity``.

        Entries ``> 0`` pulse the positive device, ``< 0`` the negative
        one, so at most one device per pair is pulsed.  Noise draws are
        independent per device and per parameter.
        """
        fraction = noise.effective_fraction
        if fraction > 0 and rng is None:
            raise ValueError("rng is required when noise is enabled")
        for target, mask in ((self.r_plus, polarity > 0), (self.r_minus, polarity < 0)):
            if not mask.any():
                continue
            new_r, skipped = pulse_resistances(target[mask], v, self.params, fraction, rng)
            target[mask] = new_r
            self.pulses_applied += int(mask.sum()) - skipped
            self.pulses_skipped += skipped
        touched = polarity != 0
        if touched.any():
            rp, rm = self.r_plus[touched], self.r_minus[touched]
            self._weights[touched] = self._compute_weights(rp, rm)

    def to_csv(self, path):
        """Write the weight matrix, one row per post neuron."""
        np.savetxt(path, self._weights, delimiter=",")


def init_array(n_pre, n_post, gain, rng, spread=0.15, base=1e8, params=None, r_min=None, r_max=None):
    """Array with every device at an independent random high resistance.

    With ``spread > 0`` the initial weights are all nonzero almost
    surely, breaking the symmetry between paired devices; ``spread = 0``
    makes every weight exactly zero.  The normalization window defaults
    to the full range attainable by the device law.
    """
    if n_pre <= 0 or n_post <= 0:
        raise ValueError("array dimensions must be positive")
    params = params or PowerLawParams()
    r_min = params.r_zero if r_min is None else r_min
    r_max = params.r_max if r_max is None else r_max
    shape = (n_post, n_pre)
    return SynapseArray(
        r_plus=init_resistance(rng, base, spread, size=shape),
        r_minus=init_resistance(rng, base, spread, size=shape),
        gain=gain,
        r_min=r_min,
        r_max=r_max,
        params=params,
    )


def weights_matrix(arr):
    """Module-level alias for :meth:`SynapseArray.weights_matrix`."""
    return arr.weights_matrix()
