"""Pulse-level simulator of a two-electron double-quantum-dot spin-qubit device.

Numerical experiments covered: coherent single-spin control (Rabi, Ramsey,
Hahn echo), exchange spectroscopy and the exchange-vs-barrier-voltage law,
a resonant exchange-gated CNOT with conditional-phase bookkeeping,
single-qubit Clifford randomized benchmarking, Monte-Carlo single-shot
readout traces with fidelity/visibility analysis, and two-qubit state
tomography of the CNOT-generated Bell state.
"""

from .qcore import (
    DensityMatrix,
    PauliLabel,
    TwoQubitState,
    all_pauli_labels,
    eig_hermitian,
    expm_skew_hermitian,
    pauli_expectation,
    spin_operators,
)
from .device import (
    DeviceParams,
    ExchangeFitParams,
    build_static_hamiltonian,
    energy_levels,
    exchange_from_detuning,
    exchange_from_voltage,
    fit_exchange_law,
    load_device_config,
    transition_frequencies,
)
from .pulses import (
    CnotGate,
    CompositeSegment,
    DcExchange,
    Idle,
    MicrowaveBurst,
    NoiseConfig,
    PulseSequence,
    calibrate_cnot,
    cnot_sequence,
    conditional_phase,
    evolve,
    evolve_ensemble,
)

__version__ = "0.1.0"
