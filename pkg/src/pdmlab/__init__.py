"""Position-dependent-mass quantum and classical mechanics toolkit."""

from . import serialize
from .errors import (
    ConfinementError,
    ConvergenceError,
    DomainError,
    IntegrationError,
    PdmlabError,
    ValidationError,
)
from .mass_models import (
    CATALOG_TAGS,
    MassProfile,
    PairCatalogEntry,
    ScalarMultiplier,
    constant_mass,
    constant_scalar,
    custom_mass,
    default_catalog,
    gaussian_mass,
    reciprocal_quadratic_mass,
    make_pair,
    mass_from_csv,
    mass_from_scalar,
    scalar_from_csv,
    scalar_from_mass,
    tabulated_mass,
    tabulated_scalar,
    verify_pair,
)
from .point_transform import (
    GriddedWavefunction,
    TransformMap,
    build_map,
    jacobian_trace_residual,
    pull_wavefunction,
    push_wavefunction,
    radial_map,
)
from .operators import (
    DiscretizedOperator,
    OrderingParams,
    PotentialSpec,
    bendaniel_duke,
    box_potential,
    build_pdm_momentum,
    build_pseudo_momentum,
    build_reduced_pdm,
    build_von_roos,
    gora_williams,
    harmonic_potential,
    hermiticity_defect,
    kinetic_identity_residual,
    mm_ordering,
    potential_from_tag,
    symmetrize,
    zhu_kroemer,
)
from .spectral_solver import (
    IsospectralityReport,
    OrderingSweepReport,
    SpectrumResult,
    isospectrality_check,
    ordering_sweep,
    reference_q_operator,
    solve_general,
    solve_symmetric,
)
from .em_coupling import (
    EligibilityReport,
    LandauNumericResult,
    LandauSolution,
    VectorPotentialSpec,
    build_pdm_eigenfunction,
    curl_fd,
    eligibility,
    gauge_divergence_report,
    gauge_divergence_residual,
    hermite_function,
    landau_energy,
    landau_energy_with_field,
    landau_solution,
    minimal_coupling_identity_residual,
    shell_sample_points,
    solve_example_numeric,
    transverse_mode,
    transverse_overlap,
)
from .classical_dynamics import (
    ClassicalFields,
    ClassicalState,
    EquivalenceReport,
    TrajectoryResult,
    classical_fields,
    eom_rhs,
    fields_from_mass_profile,
    gradient_check,
    hamiltonian_eval,
    integrate,
    transform_equivalence_check,
)

__version__ = "0.1.0"
