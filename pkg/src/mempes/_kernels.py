"""Jitted inner loops for the two per-timestep hot spots.

Pure math only: random draws are made by the callers and passed in, so
results are reproducible and the kernels stay testable against plain
numpy reference implementations.
"""

import math

from numba import njit


@njit(cache=True)
def pulse_kernel(r, g, fraction, r_zero, r_one, c, out):
    """One SET pulse per entry of ``r`` via power-law inversion.

    ``g`` holds the (3, len(r)) standard-normal draws perturbing
    r_zero, r_one, and the exponent when ``fraction > 0``.  Entries with
    degenerate perturbed parameters (or a non-finite update) keep their
    value.  Returns the number of skipped entries.
    """
    skipped = 0
    for i in range(r.size):
        ri = r[i]
        if fraction > 0.0:
            r0 = r_zero * (1.0 + fraction * g[0, i])
            r1 = r_one * (1.0 + fraction * g[1, i])
            ce = c * (1.0 + fraction * g[2, i])
        else:
            r0 = r_zero
            r1 = r_one
            ce = c
        if ce >= 0.0 or r1 <= 0.0 or ri <= r0:
            out[i] = ri
            skipped += 1
            continue
        n = ((ri - r0) / r1) ** (1.0 / ce)
        if n < 1.0:
            n = 1.0
        updated = r0 + r1 * (n + 1.0) ** ce
        if math.isfinite(updated):
            out[i] = updated
        else:
            out[i] = ri
            skipped += 1
    return skipped


@njit(cache=True)
def lif_kernel(voltage, refractory, currents, dt, tau_rc, tau_ref, spikes):
    """Advance LIF neurons one step in place; fills 0/1 ``spikes``.

    Exponential integration over the non-refractory part of the step,
    with the threshold crossing located inside the step.
    """
    for i in range(voltage.size):
        refr = refractory[i] - dt
        delta = dt - refr
        if delta < 0.0:
            delta = 0.0
        elif delta > dt:
            delta = dt
        j = currents[i]
        v = voltage[i] - (j - voltage[i]) * math.expm1(-delta / tau_rc)
        if v > 1.0:
            spikes[i] = 1.0
            overshoot = (v - 1.0) / (j - v)
            if overshoot > 1.0 - 1e-12:
                overshoot = 1.0 - 1e-12
            refr = tau_ref + dt + tau_rc * math.log1p(-overshoot)
            v = 0.0
        else:
            spikes[i] = 0.0
            if v < 0.0:
                v = 0.0
        if refr < 0.0:
            refr = 0.0
        voltage[i] = v
        refractory[i] = refr
