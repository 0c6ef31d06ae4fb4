"""Repeat-until-success cubic phase gate simulator on truncated Fock spaces."""

from .errors import (
    CutoffError,
    DegenerateOutcomeError,
    DimensionError,
    FactorFailure,
    NumericalDegradationError,
)
from .hilbert import (
    CONVENTION,
    FockOperator,
    FockState,
    annihilation,
    apply,
    coherent,
    expectation,
    fidelity,
    number_state,
    partial_trace,
    quadrature_p,
    quadrature_x,
    tensor,
    vacuum,
)
from .gaussian import (
    beamsplitter_gate,
    displacement_gate,
    momentum_shift_gate,
    qnd_gate,
    qnd_prime_gate,
    squeeze_gate,
)
from .cubic import (
    CubicDecomposition,
    factor_operator,
    gamma_factors,
    ideal_cubic_gate,
    monomial_identity_report,
    polynomial_identity_report,
    u_n_operator,
)
from .protocol import (
    DetectorModel,
    IDEAL_DETECTOR,
    ProtocolConfig,
    TrialLog,
    couple_resource,
    detector_povm,
    full_gate,
    ideal_project,
    one_photon_reduce,
    rus_factor,
    subtraction_attempt,
)
from .analysis import (
    ErrorEnsembleSpec,
    MomentSweepSpec,
    error_operator_stats,
    gate_fidelity_report,
    variance_sweep,
)
from .schemes import (
    GkpStateSpec,
    gkp_cubic_state,
    gkp_mode_likelihood,
    marek_gate,
    marek_resource_state,
    marek_restart_mean,
    runtime_models,
)

__version__ = "0.1.0"
