"""Finite-dimensional quantum measurement theory, executable.

Observables as spectral measures, instruments in Kraus form, unitary
measurement models, and numerical verifiers for nondisturbance, joint
probabilities of consecutive measurements and the structure of
measurement-induced state changes.
"""

from .errors import (
    CommutationError,
    InvalidDimensionError,
    InvalidOperatorError,
    LocalityError,
    MeasurementError,
    NotAMeasurementError,
    OwnershipError,
    PreconditionError,
)
from .instruments import (
    CPMap,
    ChoiMatrix,
    Instrument,
    LinearMap,
    choi_matrix,
    cp_check,
    dl_axioms_check,
    instrument_apply,
    luders_instrument,
    measure_and_reset_instrument,
    outcome_probability,
    posterior_state,
    theorem2_check,
    transpose_map,
)
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    eig_hermitian,
    partial_trace_second,
    random_density,
    random_unitary,
    tensor,
)
from .models import (
    Bipartition,
    MeasurementModel,
    OutcomeCorrespondence,
    heisenberg_image,
    induced_instrument,
    joint_prob_consecutive,
    joint_prob_local_pair,
    locality_check,
    measures_observable_check,
    nondisturbance_check,
    nondisturbance_with_evolution,
    nonselective_change,
    pure_ancilla_condition,
    theorem1_verify,
)
from .observables import (
    JointRefinement,
    Observable,
    OutcomeSet,
    born_probability,
    commutes,
    joint_probability_commuting,
    joint_refinement,
    spectral_projector,
)
from .sampling import EmpiricalJoint, epr_demo, sample_consecutive

__all__ = [
    "Bipartition",
    "CPMap",
    "ChoiMatrix",
    "CommutationError",
    "DEFAULT_TOL",
    "EmpiricalJoint",
    "Instrument",
    "InvalidDimensionError",
    "InvalidOperatorError",
    "JointRefinement",
    "LinearMap",
    "LocalityError",
    "MeasurementError",
    "MeasurementModel",
    "NotAMeasurementError",
    "Observable",
    "OutcomeCorrespondence",
    "OutcomeSet",
    "OwnershipError",
    "PreconditionError",
    "Tolerance",
    "born_probability",
    "choi_matrix",
    "commutes",
    "cp_check",
    "dl_axioms_check",
    "eig_hermitian",
    "epr_demo",
    "heisenberg_image",
    "induced_instrument",
    "instrument_apply",
    "joint_prob_consecutive",
    "joint_prob_local_pair",
    "joint_probability_commuting",
    "joint_refinement",
    "locality_check",
    "luders_instrument",
    "measure_and_reset_instrument",
    "measures_observable_check",
    "nondisturbance_check",
    "nondisturbance_with_evolution",
    "nonselective_change",
    "outcome_probability",
    "partial_trace_second",
    "posterior_state",
    "pure_ancilla_condition",
    "random_density",
    "random_unitary",
    "sample_consecutive",
    "spectral_projector",
    "tensor",
    "theorem1_verify",
    "theorem2_check",
    "transpose_map",
]

__version__ = "0.1.0"
