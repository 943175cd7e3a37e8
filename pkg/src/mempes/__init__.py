"""Spiking-network simulator with power-law memristor synapses.

Network weights are differential pairs of pulse-programmed resistive
devices; a discrete, noise-robust error-driven rule decides which
device of each pair receives a SET pulse at every timestep.
"""

from .device import (
    MemristorState,
    NoiseSpec,
    PowerLawParams,
    apply_set_pulse,
    fit_power_law,
    init_resistance,
    pulse_count_from_resistance,
    resistance_after_pulses,
)
from .experiment import (
    ExperimentConfig,
    RunResult,
    build_model,
    compare_rules,
    run,
    sweep_exponent,
    sweep_gamma,
    sweep_noise,
)
from .learning import MpesConfig, PesConfig, local_error, mpes_step, pes_update
from .nef import Ensemble, LifParams, build_ensemble, lif_rate, solve_decoders
from .signals import MetricsReport, SignalSpec, mse, sine_signal, spearman, white_signal
from .synapses import SynapseArray, SynapsePair, init_array, normalized_conductance, weight

__version__ = "0.1.0"
