"""Point vortices on the unit sphere: polygonal ring equilibria, their
isotypic spectra, symmetry-reduced continuation of periodic branches,
choreography certification, and direct dynamics."""

from .choreography import (
    ChoreographyCert,
    admissible_ratios,
    certify_choreography,
    choreography_cert,
    inertial_orbit,
    k_tilde,
    modular_inverse,
    sample_inertial,
    save_report,
    scan_branch_for_choreographies,
    write_inertial_csv,
)
from .continuation import (
    Branch,
    BranchPoint,
    NewtonInfo,
    amplitude,
    branch_seed,
    continue_branch,
    extrapolate_seed_frequency,
    load_branch,
    newton_correct,
    period_map_check,
    save_branch,
)
from .dynamics import (
    APPROACH_THRESHOLD,
    RHS_THRESHOLD,
    SimState,
    Trajectory,
    chart_hamiltonian,
    integrate,
    rhs_rotating_chart,
    rhs_sphere,
    ring_state,
    sphere_hamiltonian,
    sphere_moment,
)
from .errors import (
    ChartEscape,
    ChartSingular,
    CollisionApproach,
    CollisionError,
    Degenerate,
    DegenerateAt,
    FrequencyMismatch,
    NoBifurcation,
    NoConvergence,
    NotCoprime,
    ResonanceWarning,
    StepUnderflow,
    VortexSphereError,
)
from .geometry import J, chordal_sq, conformal_weight, rotation, stereo_lift, stereo_project
from .loops import (
    CollisionMargin,
    FourierLoop,
    LoopConfig,
    collision_margin,
    complexify,
    constant_loop,
    equilibrium_config,
    kappa_image,
    linearized_block_matrix,
    loop_eval,
    loop_from_grid,
    loop_grid,
    loop_inner,
    nu_derivative,
    orthogonality_defect,
    realify,
    reduced_jacobian,
    reduced_residual,
    residual_f,
    symmetry_defect,
    symmetry_extend,
    time_derivative,
)
from .ring import (
    COLLISION_THRESHOLD,
    RingParams,
    amended_potential,
    gradient_V,
    hamiltonian_H,
    hessian_V,
    min_pair_distance,
    moment_G,
    pair_distances,
    polar_from_radius,
    radius_from_polar,
    ring_omega,
    ring_params,
    ring_positions,
    s_sum,
)
from .spectral import (
    SpectralBlock,
    StabilityReport,
    block_B,
    block_m,
    critical_frequency,
    det_d,
    hessian_A,
    hessian_full,
    hessian_minor,
    isotypic_basis,
    mode_margin,
    morse_index,
    morse_jump,
    resonance_check,
    spectral_block,
    stability_verdict,
)

__version__ = "1.0.0"

__all__ = [name for name in dir() if not name.startswith("_")]
