"""Open-system Kraus dynamics and EPR correlations for neutral-meson pairs."""

from .analytic import ProperTimePair, c_dplus_dminus, c_dplus_dplus, c_strangeness, joint_prob_analytic
from .errors import (
    BoundViolationError,
    InvalidStateError,
    LayoutError,
    OrderingError,
    ParameterError,
    SymmetryError,
)
from .evolution import (
    CorrelationResult,
    MeasurementOutcome,
    correlation,
    correlation_from_probabilities,
    correlation_grid,
    evolve,
    heisenberg_observable,
    joint_probability,
    joint_probability_heisenberg,
    measure,
)
from .hilbert import (
    CompositeLayout,
    DensityOperator,
    Flavor,
    Momentum,
    Operator,
    SpaceLayout,
    distinguishable_layout,
    expectation,
    identical_layout,
    is_symmetric,
    permutation_operator,
    tensor,
)
from .kraus import KrausSet, build_kraus, proper_time, two_particle_kraus, verify_normalization
from .observables import (
    Mode,
    dichotomic,
    singlet_state,
    strangeness,
    symmetrized_dichotomic,
    symmetrized_strangeness,
)
from .params import PRESETS, PhysicalParams, ValidationReport, validate

__version__ = "0.1.0"
