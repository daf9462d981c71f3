"""
uncertainty_lab - Verify discrete Heisenberg uncertainty principles.

Computes the lattice and finite-sequence uncertainty inequalities, their
Bessel-function minimizers, the discrete Schrodinger evolution with its
Virial identity, and the convergence of minimizers to their limits.
"""

__version__ = "0.1.0"

# Re-export public API from submodules
from .bessel import (
    QUADRATURE_PANELS,
    BesselArg,
    CFValue,
    ContinuedFraction,
    RatioFamily,
    bessel_i_family,
    bessel_i_family_scaled,
    bessel_i_ratio,
    bessel_i_ratios,
    bessel_j_family,
    bessel_k_family,
    bessel_k_family_scaled,
    cf_eval,
    cf_value,
    i0_asymptotic_gap,
    miller_start_order,
    quadrature_bessel_i,
)
from .cli import (
    RunConfig,
    create_parser,
    main,
    run,
)
from .errors import (
    AmbiguousMinimizerError,
    BesselOverflowError,
    CaseTooSmallError,
    ConstraintViolationError,
    DegenerateFractionError,
    DegenerateInputError,
    DegenerateNormalizationError,
    InvalidArgumentError,
    NumericalError,
    TruncationError,
    UncertaintyLabError,
    UnsupportedDimensionError,
    UnsupportedWeightError,
)
from .evolution import (
    CoupledVariant,
    IntertwineResidual,
    PhiWeight,
    VirialTrace,
    coupled_partner,
    coupled_wave_residual,
    evolve_coupled,
    evolve_kernel,
    evolve_schrodinger,
    evolve_spectral,
    gamma_family_evolve,
    intertwine_check,
    intertwine_operator,
    padded_radius,
    virial_first_derivative,
    virial_general,
    virial_second_derivative,
    virial_trace_coupled,
    virial_trace_schrodinger,
    weighted_mass,
)
from .export import (
    case_from_json,
    case_to_json,
    export_csv,
    export_json,
    export_plot_data,
    sequence_from_json,
    sequence_to_json,
)
from .finite import (
    COUNTEREXAMPLES,
    FiniteCase,
    FiniteMinimizer,
    FiniteVirialSample,
    MinimizerMethod,
    QConvention,
    Variant,
    build_case,
    circulant_residual,
    commutator_form,
    commutator_form_matrix,
    dft_limit_profile,
    dft_momentum_norm,
    dirichlet_cf_limit,
    dirichlet_closed_form,
    evolve_finite,
    finite_laplacian,
    finite_virial,
    solve_minimizer,
    uncertainty_finite,
)
from .lattice import (
    EQUALITY_TOL,
    TAIL_TOL,
    LatticeSeq,
    UncertaintyReport,
    commutator_expectation,
    inner_product,
    normalization_quantity,
    op_backward_difference,
    op_forward_difference,
    op_laplacian,
    op_momentum,
    op_position,
    perturb_to_admissible,
    random_sequence,
    second_normalization_quantity,
    tail_bound,
    truncation_radius,
    uncertainty_main,
    uncertainty_second,
)
from .logging import (
    get_logger,
    setup_logging,
)
from .minimizer import (
    MinimizerSpec,
    NormMode,
    apply_norm_mode,
    gaussian_convergence,
    gaussian_sweep,
    minimizer_at_time,
    minimizer_main,
    minimizer_second,
    periodic_profile,
    profile_fourier_coefficient,
    recurrence_residual_main,
    recurrence_residual_second,
    unit_l2_constant,
)
from .service import (
    FiniteMinimizerResult,
    LabService,
    MinimizerResult,
)
from .types import (
    CFLimitRecord,
    ConvergenceRecord,
    EvolutionRecord,
    FiniteRecord,
    ProfileRecord,
    ReportRecord,
    VirialRecord,
)
from .utils import (
    get_max_workers,
    parse_complex_list,
    parse_float_list,
    parse_int_list,
    parse_range,
    validate_output_path,
)

__all__ = [
    # Version
    "__version__",
    # Bessel functions and continued fractions
    "QUADRATURE_PANELS",
    "BesselArg",
    "CFValue",
    "ContinuedFraction",
    "RatioFamily",
    "bessel_i_family",
    "bessel_i_family_scaled",
    "bessel_i_ratio",
    "bessel_i_ratios",
    "bessel_j_family",
    "bessel_k_family",
    "bessel_k_family_scaled",
    "cf_eval",
    "cf_value",
    "i0_asymptotic_gap",
    "miller_start_order",
    "quadrature_bessel_i",
    # CLI
    "RunConfig",
    "create_parser",
    "main",
    "run",
    # Errors
    "AmbiguousMinimizerError",
    "BesselOverflowError",
    "CaseTooSmallError",
    "ConstraintViolationError",
    "DegenerateFractionError",
    "DegenerateInputError",
    "DegenerateNormalizationError",
    "InvalidArgumentError",
    "NumericalError",
    "TruncationError",
    "UncertaintyLabError",
    "UnsupportedDimensionError",
    "UnsupportedWeightError",
    # Evolution
    "CoupledVariant",
    "IntertwineResidual",
    "PhiWeight",
    "VirialTrace",
    "coupled_partner",
    "coupled_wave_residual",
    "evolve_coupled",
    "evolve_kernel",
    "evolve_schrodinger",
    "evolve_spectral",
    "gamma_family_evolve",
    "intertwine_check",
    "intertwine_operator",
    "padded_radius",
    "virial_first_derivative",
    "virial_general",
    "virial_second_derivative",
    "virial_trace_coupled",
    "virial_trace_schrodinger",
    "weighted_mass",
    # Export
    "case_from_json",
    "case_to_json",
    "export_csv",
    "export_json",
    "export_plot_data",
    "sequence_from_json",
    "sequence_to_json",
    # Finite sequences
    "COUNTEREXAMPLES",
    "FiniteCase",
    "FiniteMinimizer",
    "FiniteVirialSample",
    "MinimizerMethod",
    "QConvention",
    "Variant",
    "build_case",
    "circulant_residual",
    "commutator_form",
    "commutator_form_matrix",
    "dft_limit_profile",
    "dft_momentum_norm",
    "dirichlet_cf_limit",
    "dirichlet_closed_form",
    "evolve_finite",
    "finite_laplacian",
    "finite_virial",
    "solve_minimizer",
    "uncertainty_finite",
    # Lattice
    "EQUALITY_TOL",
    "TAIL_TOL",
    "LatticeSeq",
    "UncertaintyReport",
    "commutator_expectation",
    "inner_product",
    "normalization_quantity",
    "op_backward_difference",
    "op_forward_difference",
    "op_laplacian",
    "op_momentum",
    "op_position",
    "perturb_to_admissible",
    "random_sequence",
    "second_normalization_quantity",
    "tail_bound",
    "truncation_radius",
    "uncertainty_main",
    "uncertainty_second",
    # Logging
    "get_logger",
    "setup_logging",
    # Minimizers
    "MinimizerSpec",
    "NormMode",
    "apply_norm_mode",
    "gaussian_convergence",
    "gaussian_sweep",
    "minimizer_at_time",
    "minimizer_main",
    "minimizer_second",
    "periodic_profile",
    "profile_fourier_coefficient",
    "recurrence_residual_main",
    "recurrence_residual_second",
    "unit_l2_constant",
    # Service
    "FiniteMinimizerResult",
    "LabService",
    "MinimizerResult",
    # Types
    "CFLimitRecord",
    "ConvergenceRecord",
    "EvolutionRecord",
    "FiniteRecord",
    "ProfileRecord",
    "ReportRecord",
    "VirialRecord",
    # Utilities
    "get_max_workers",
    "parse_complex_list",
    "parse_float_list",
    "parse_int_list",
    "parse_range",
    "validate_output_path",
]
