"""Qubit-assisted time-reversal metrology on a collective spin ensemble.

A small dense-matrix toolkit for the two-step echo protocol: a probe of N
spins is jointly evolved with an ancilla qubit, a phase is encoded by a probe
rotation, and the evolution is reversed before readout.  The package builds
the circuit, finds reversal periods, and evaluates quantum and classical
Fisher information under ideal, deviated, and dephased conditions, plus a CSV
sweep harness and CLI (:mod:`echometry.experiments`, :mod:`echometry.cli`).
"""

from .spin import (
    ContractViolation,
    EnsembleDim,
    PhaseGenerator,
    collective_ops,
    eigenbasis,
    joint_embed,
    phase_generator,
    unitary_of_hermitian,
)
from .states import (
    AncillaState,
    SpectralProbe,
    ThermalSpec,
    ancilla_state,
    dephase_ancilla,
    ghz_probe,
    polarized_probe,
    spectral_decompose,
    thermal_probe,
)
from .circuit import (
    ModelParams,
    OptimalSettings,
    PeriodNotFound,
    PeriodSolution,
    Schedule,
    bch_coefficients,
    circuit_unitary,
    closed_form_unitary,
    conjugate_schedule,
    encoder,
    global_phase_distance,
    hamiltonian,
    normalized_trace,
    optimal_generator,
    optimal_settings,
    period_schedule,
    propagator,
    reversal_period,
)
from .fisher import (
    DeviationSpec,
    FisherResult,
    ProbabilityTable,
    cfi,
    measurement_probs,
    output_state,
    output_state_derivative,
    qfi_dephased,
    qfi_deviation,
    qfi_general,
    qfi_simplified,
    qfi_sld_oracle,
    qfi_thermal,
)
from .experiments import FitResult, SweepConfig, fit_quadratic, run_scenario, run_validation

__version__ = "0.1.0"

__all__ = [
    "ContractViolation",
    "EnsembleDim",
    "PhaseGenerator",
    "collective_ops",
    "eigenbasis",
    "joint_embed",
    "phase_generator",
    "unitary_of_hermitian",
    "AncillaState",
    "SpectralProbe",
    "ThermalSpec",
    "ancilla_state",
    "dephase_ancilla",
    "ghz_probe",
    "polarized_probe",
    "spectral_decompose",
    "thermal_probe",
    "ModelParams",
    "OptimalSettings",
    "PeriodNotFound",
    "PeriodSolution",
    "Schedule",
    "bch_coefficients",
    "circuit_unitary",
    "closed_form_unitary",
    "conjugate_schedule",
    "encoder",
    "global_phase_distance",
    "hamiltonian",
    "normalized_trace",
    "optimal_generator",
    "optimal_settings",
    "period_schedule",
    "propagator",
    "reversal_period",
    "DeviationSpec",
    "FisherResult",
    "ProbabilityTable",
    "cfi",
    "measurement_probs",
    "output_state",
    "output_state_derivative",
    "qfi_dephased",
    "qfi_deviation",
    "qfi_general",
    "qfi_simplified",
    "qfi_sld_oracle",
    "qfi_thermal",
    "FitResult",
    "SweepConfig",
    "fit_quadratic",
    "run_scenario",
    "run_validation",
]
