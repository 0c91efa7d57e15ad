"""switchkit: numerics for switch processes.

Compute and invert the relations among a switching-time distribution, the
expected value E(t) of the switch process it drives, and the covariance
C(t) of the stationary counterpart; screen geometric divisibility; run the
independent interval approximation for clipped Gaussian processes.
"""

from .distributions import (
    GeometricCompound,
    SwitchingDistribution,
    make_exponential,
    make_gamma,
    make_geometric_compound,
    make_rng,
    make_tabulated,
    parse_distribution,
    path_rng,
    tabulate_cdf,
    tabulate_pdf,
)
from .divisibility import DivisibilityReport, divisor_laplace, gd_check, reduce_order
from .errors import (
    DomainError,
    InvalidArgumentError,
    NumericError,
    ResourceLimitError,
    ShapeCheckError,
    SwitchKitError,
)
from .grid import (
    GridFunction,
    GridSpec,
    convolution_tail_bound,
    convolve,
    cumulative_integral,
    derivative,
    integral,
    second_derivative,
)
from .iia import (
    GaussianCovariance,
    IIAResult,
    check_iia_conditions,
    clip_covariance,
    damped_cosine_covariance,
    diffusion2d_covariance,
    exponential_covariance,
    iia_pipeline,
    tabulated_covariance,
)
from .laplace import (
    CMConfig,
    CMReport,
    LaplaceFunction,
    cm_check,
    covariance_laplace,
    expected_laplace_from_psi,
    invert_laplace,
    psi_from_expected_laplace,
)
from .recovery import (
    ShapeReport,
    check_covariance_shape,
    check_expected_shape,
    covariance_delay_route,
    covariance_from_expected,
    divisor_from_covariance,
    divisor_from_expected,
    expected_derivative_series,
    expected_from_covariance,
    expected_value_series,
    mean_from_expected,
    switching_law_from_divisor,
)
from .simulation import (
    StationaryInitial,
    SwitchTrajectory,
    estimate_covariance,
    estimate_expected_value,
    evaluate_stationary,
    simulate_stationary,
    simulate_switch,
)

__version__ = "0.1.0"

__all__ = [
    "CMConfig",
    "CMReport",
    "DivisibilityReport",
    "DomainError",
    "GaussianCovariance",
    "GeometricCompound",
    "GridFunction",
    "GridSpec",
    "IIAResult",
    "InvalidArgumentError",
    "LaplaceFunction",
    "NumericError",
    "ResourceLimitError",
    "ShapeCheckError",
    "ShapeReport",
    "StationaryInitial",
    "SwitchKitError",
    "SwitchTrajectory",
    "SwitchingDistribution",
    "check_covariance_shape",
    "check_expected_shape",
    "check_iia_conditions",
    "clip_covariance",
    "cm_check",
    "convolution_tail_bound",
    "convolve",
    "covariance_delay_route",
    "covariance_from_expected",
    "covariance_laplace",
    "cumulative_integral",
    "damped_cosine_covariance",
    "derivative",
    "diffusion2d_covariance",
    "divisor_from_covariance",
    "divisor_from_expected",
    "divisor_laplace",
    "estimate_covariance",
    "estimate_expected_value",
    "evaluate_stationary",
    "expected_derivative_series",
    "expected_from_covariance",
    "expected_laplace_from_psi",
    "expected_value_series",
    "exponential_covariance",
    "gd_check",
    "iia_pipeline",
    "integral",
    "invert_laplace",
    "make_exponential",
    "make_gamma",
    "make_geometric_compound",
    "make_rng",
    "make_tabulated",
    "mean_from_expected",
    "parse_distribution",
    "path_rng",
    "psi_from_expected_laplace",
    "reduce_order",
    "second_derivative",
    "simulate_stationary",
    "simulate_switch",
    "switching_law_from_divisor",
    "tabulate_cdf",
    "tabulate_pdf",
    "tabulated_covariance",
]
