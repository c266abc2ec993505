"""Tools for characterizing, quantifying, and amplifying quantum steering.

The package is organized around four layers: states and measurement
families (`states`, `assemblages`), steering and Bell functionals with
their exact bounds and violation fractions (`functionals`,
`strategies`), convex steerability monotones with certificates
(`monotones`), and named constructions plus closed-form criteria and
planners on top (`games`, `criteria`).  `serialize` and `cli` expose the
JSON formats and the `steerkit` command.
"""

from .assemblages import (
    Assemblage,
    Instrument1W,
    InstrumentBranch,
    MeasurementFamily,
    MembershipResult,
    WiringMap,
    apply_instrument,
    lhs_membership,
    steer,
)
from .criteria import (
    AmplificationPlan,
    BellSufficiency,
    BellUpperBounds,
    IsotropicThresholds,
    SuperactivationReport,
    amplification_plan,
    bell_sufficient,
    bell_upper_bounds,
    fef_threshold,
    harmonic,
    isotropic_thresholds,
    kappa,
    lvs_upper_povm,
    lvs_upper_projective,
    mub_threshold,
    superactivation_min_copies,
)
from .functionals import (
    BellFunctional,
    Correlation,
    Fraction,
    LocalBound,
    LvsResult,
    RotatedFraction,
    SeesawResult,
    SteeringBound,
    SteeringFunctional,
    best_rotated_fraction,
    correlation_from,
    induced_functional,
    local_bound,
    lv_bell_seesaw,
    lv_s,
    nonlocality_fraction,
    shift_nonnegative,
    steering_bound,
    steering_bound_sdp,
    steering_fraction,
)
from .games import (
    KvFraction,
    KvGame,
    MubFamily,
    cglmp,
    cglmp_lv_lower,
    kv_fraction,
    kv_game,
    kv_measurements,
    mub,
    mub_functional,
)
from .monotones import (
    AuditReport,
    AuditRow,
    MonotoneReport,
    PropositionReport,
    RobustnessProgram,
    check_proposition_robustness,
    check_proposition_weight,
    monotonicity_audit,
    optimal_steering_fraction,
    robustness_program,
    steerable_weight,
    steering_robustness,
)
from .states import (
    DensityMatrix,
    FefResult,
    IsotropicState,
    fef,
    isotropic,
    ket_max_entangled,
    max_entangled,
    random_density_matrix,
    singlet_fidelity,
    tensor_copies,
    twirl,
    twirl_monte_carlo,
)

__version__ = "0.1.0"
