"""EPR spin correlations for two-particle wavepackets and moving detectors.

Closed-form Gaussian backend cross-validated against an independent
lattice oracle; see README.md for the scenario file format and CLI.
"""

from .errors import NumericalFailure, ValidationError
from .spin import (
    Direction,
    direction_rotation,
    spin_component,
    spin_dim,
    spin_generators,
    spin_index,
    spin_projector,
    spin_values,
)
from .states import (
    GaussianPacket,
    StateTerm,
    TwoParticleState,
    boost,
    evolve_free,
    exchange_defect,
    exchanged,
    inner_product,
    make_singlet,
    make_triplet,
    norm_squared,
    translate,
)
from .measurement import (
    EPS_PROB,
    LocalizedSpinProjector,
    PairObservable,
    Region,
    expectation_analytic,
    localized_projector,
    luders_reduce,
    number_projectors,
    one_particle_spin_projectors,
    spin_observable,
    symmetric_observable,
)
from .grid import (
    GridConfig,
    LatticeState,
    apply_boost_grid,
    apply_pair_observable,
    apply_rotation_spin,
    apply_translation_grid,
    boundary_mass,
    covariance_check,
    dense_operator,
    discretize,
    evolve_grid,
    joint_probabilities_grid,
    lattice_inner,
    project_grid,
)
from .correlation import (
    CorrelationResult,
    ObserverSpec,
    Scenario,
    chsh_value,
    correlation_distinguishable,
    correlation_equal_time,
    correlation_identical,
    correlation_symmetrized,
    joint_probabilities,
    singlet_closed_form,
    triplet_closed_form,
)
from .scenario_io import (
    emit_document,
    emit_results,
    parse_document,
    parse_results,
    parse_scenario,
)

__version__ = "0.1.0"
