"""gradflow: linear multi-step integration of gradient flow.

Optimization algorithms as numerical integrators: build and analyze
multi-step methods (consistency, zero-stability, absolute stability,
worst-case rates), construct the optimal one- and two-step schemes for a
curvature interval, and check, iterate for iterate, that the classical
first-order optimizers are exactly these integrators applied to the
gradient-flow equation.
"""

__version__ = "0.1.0"

from .errors import (
    DomainViolation,
    EigenFailure,
    GradFlowError,
    InfeasibleHhat,
    InnerSolveFailure,
    InsufficientData,
    InvalidInterval,
    MissingMinimizer,
    NoConvergence,
    NonFiniteIterate,
    NonPositiveValue,
    PolicyUnavailable,
    UnknownAlgorithm,
    ZeroPolynomial,
)
from .polynomials import Polynomial, RootSet, root_condition, roots
from .multistep import (
    MultistepMethod,
    RatePrediction,
    StabilityReport,
    characteristic_polynomial,
    consistency_residuals,
    euler,
    in_stability_region,
    is_consistent,
    is_zero_stable,
    rate_prediction,
    rate_profile,
    run,
    stability_report,
    truncation_error,
)
from .design import (
    TwoStepDesign,
    beta,
    complex_root_conditions,
    design_from_coefficients,
    design_m1,
    design_m2,
    euler_optimal,
    feasible_window,
    from_change_of_variables,
    m1_rate,
    m2_rate,
    method_m1,
    method_m2,
    optimal_roots,
)
from .problems import (
    BoxIndicator,
    CompositeProblem,
    GenericOmega,
    L1Norm,
    MirrorGeometry,
    QuadraticProblem,
    SmoothProblem,
    SquaredL2,
    ZeroOmega,
    convex_rate_bound,
    entropy_geometry,
    euclidean_geometry,
    exact_flow,
    logistic_ridge,
    prox,
    random_spd_quadratic,
    reference_flow,
    scalar_quadratic,
    singular_psd_quadratic,
)
from .integrators import (
    ImexMethod,
    bootstrap_starts,
    imex_euler,
    implicit_euler,
    run_gode_imex,
    run_imex,
    run_negf_euler,
)
from .optimizers import (
    IdentifiedMethod,
    gradient_descent,
    heavy_ball,
    identify_lmm,
    mirror_descent,
    nesterov_convex,
    nesterov_sc,
    proximal_gradient,
    universal_gradient,
)
from .analysis import (
    RateFit,
    deviation_from_flow,
    fit_decay_exponent,
    fit_geometric_rate,
    global_error_study,
)
from .trajectory import Trajectory
from .kernels import backend, warm_up
