"""Quantum Fourier transforms and Schrödinger simulation on an always-on Ising register."""

from .interaction import (
    CouplingModel,
    DecayKind,
    DecayLaw,
    PairForm,
    PhasePolynomial,
    canonical_qft_model,
    fit_phase_polynomial,
)
from .qft import (
    Direction,
    Mode,
    QftPlan,
    approximate_qft_plan,
    build_qft_plan,
    ideal_qft,
    phase_oracle,
    plan_fidelities,
    run_plan,
)
from .schedule import (
    PulseEvent,
    PulseSchedule,
    build_decoupling_schedule,
    simulate,
)
from .statevector import StateVector, basis_state, new_register

__all__ = [
    "CouplingModel",
    "DecayKind",
    "DecayLaw",
    "PairForm",
    "PhasePolynomial",
    "canonical_qft_model",
    "fit_phase_polynomial",
    "Direction",
    "Mode",
    "QftPlan",
    "approximate_qft_plan",
    "build_qft_plan",
    "ideal_qft",
    "phase_oracle",
    "plan_fidelities",
    "run_plan",
    "PulseEvent",
    "PulseSchedule",
    "build_decoupling_schedule",
    "simulate",
    "StateVector",
    "basis_state",
    "new_register",
]
