"""Input-signal generators and learning-quality metrics.

Signals are d-dimensional functions of time with every component in
[-1, 1]: either uniformly phase-shifted sine waves or band-limited
white noise synthesized from seeded Fourier coefficients (exactly
periodic, deterministic in the seed).  Quality is reported as mean
squared error, Spearman rank correlation, and their ratio.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

__all__ = [
    "SignalSpec",
    "MetricsReport",
    "sine_signal",
    "BandLimitedWhite",
    "make_signal",
    "white_signal",
    "mse",
    "spearman",
    "timeseries_to_csv",
]


@dataclass(frozen=True)
class SignalSpec:
    """Description of one input signal."""

    kind: str = "sine"  # "sine" or "white"
    dim: int = 3
    period: float = 60.0  # white only
    cutoff: float = 5.0  # white only, Hz
    seed: int = 0  # white only
    rms: float = 0.5  # white only, pre-clip target

    def __post_init__(self):
        if self.kind not in ("sine", "white"):
            raise ValueError(f"unknown signal kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.period <= 0 or self.cutoff <= 0:
            raise ValueError("period and cutoff must be positive")


def sine_signal(t, dim):
    """``dim`` uniformly phase-shifted sine waves at 1/4 Hz.

    Component ``i`` is ``sin(0.5*pi*t + 2*pi*i/dim)``.  ``t`` may be a
    scalar (returns shape ``(dim,)``) or an array (appends an axis).
    """
    t = np.asarray(t, dtype=float)
    phases = 2.0 * np.pi * np.arange(dim) / dim
    return np.sin(0.5 * np.pi * t[..., None] + phases)


class BandLimitedWhite:
    """Periodic white noise with no power above the cutoff frequency.

    Each dimension is an independent sum over harmonics ``k / period``
    for ``1 <= k <= cutoff * period`` with seeded Gaussian coefficients,
    scaled to the target RMS and hard-clipped to [-1, 1].
    """

    def __init__(self, spec):
        n_harmonics = int(np.floor(spec.cutoff * spec.period))
        if n_harmonics < 1:
            raise ValueError("cutoff below 1/period leaves no representable harmonics")
        rng = np.random.default_rng(spec.seed)
        self.spec = spec
        self._omega = 2.0 * np.pi * np.arange(1, n_harmonics + 1) / spec.period
        self._cos = rng.standard_normal((n_harmonics, spec.dim))
        self._sin = rng.standard_normal((n_harmonics, spec.dim))
        power = 0.5 * (self._cos**2 + self._sin**2).sum(axis=0)
        self._scale = spec.rms / np.sqrt(power)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        angles = t[..., None] * self._omega
        raw = np.cos(angles) @ (self._cos * self._scale)
        raw += np.sin(angles) @ (self._sin * self._scale)
        return np.clip(raw, -1.0, 1.0)


def white_signal(spec, t):
    """Evaluate a band-limited white signal (convenience one-shot form)."""
    return BandLimitedWhite(spec)(t)


def make_signal(spec):
    """Callable ``t -> d-vector`` for the given spec."""
    if spec.kind == "sine":
        return lambda t: sine_signal(t, spec.dim)
    return BandLimitedWhite(spec)


def mse(reference, estimate):
    """Mean squared difference over all samples and dimensions."""
    reference = np.asarray(reference, dtype=float)
    estimate = np.asarray(estimate, dtype=float)
    if reference.shape != estimate.shape:
        raise ValueError("series shapes must match")
    if reference.size == 0:
        raise ValueError("series are empty")
    return float(np.mean((reference - estimate) ** 2))


def spearman(reference, estimate):
    """Mean over dimensions of the rank correlation through time.

    Ties get average ranks.  A dimension in which either series is
    constant has undefined correlation and contributes 0.
    """
    reference = np.atleast_2d(np.asarray(reference, dtype=float).T).T
    estimate = np.atleast_2d(np.asarray(estimate, dtype=float).T).T
    if reference.shape != estimate.shape:
        raise ValueError("series shapes must match")
    if reference.shape[0] < 2:
        raise ValueError("need at least two samples")
    rhos = []
    for d in range(reference.shape[1]):
        ra = rankdata(reference[:, d])
        rb = rankdata(estimate[:, d])
        sa, sb = ra.std(), rb.std()
        if sa == 0 or sb == 0:
            rhos.append(0.0)
            continue
        rhos.append(float(np.mean((ra - ra.mean()) * (rb - rb.mean())) / (sa * sb)))
    return float(np.mean(rhos))


@dataclass(frozen=True)
class MetricsReport:
    """MSE, Spearman rho, and their ratio over one evaluation window."""

    mse: float
    spearman_rho: float
    ratio: float

    @classmethod
    def from_series(cls, reference, estimate):
        err = mse(reference, estimate)
        rho = spearman(reference, estimate)
        ratio = rho / err if err > 0 else float("nan")
        return cls(err, rho, ratio)


def timeseries_to_csv(path, t, reference, estimate):
    """Write columns ``t, ref_0..ref_{d-1}, est_0..est_{d-1}``."""
    reference = np.asarray(reference)
    estimate = np.asarray(estimate)
    d = reference.shape[1]
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(
            ["t"] + [f"ref_{i}" for i in range(d)] + [f"est_{i}" for i in range(d)]
        )
        for k in range(len(t)):
            writer.writerow(
                [f"{t[k]:.6f}"]
                + [repr(float(x)) for x in reference[k]]
                + [repr(float(x)) for x in estimate[k]]
            )
