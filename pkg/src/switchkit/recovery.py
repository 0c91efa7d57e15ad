"""Time-domain relations between the switching-time law, the expected value
function E(t) of the switch process, and the covariance C(t) of its
stationary counterpart.

The expected value is built from the alternating series over convolution
powers of the distribution function, E = 1 + 2 sum_k (-1)^k F^(k-fold),
truncated with an explicit geometric tail bound.  The bridges are
C'(t) = -(2/mu) E(t) with C(0) = 1, integrated or differentiated on the
grid.  For laws whose E is non-negative and decreasing, the 2-geometric
divisor is read off directly: divisor CDF = 1 - E, divisor density = -E'.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .distributions import (
    GeometricCompound,
    SwitchingDistribution,
    make_geometric_compound,
    tabulate_cdf,
    tabulate_pdf,
)
from .errors import (
    InvalidArgumentError,
    NumericError,
    ResourceLimitError,
    ShapeCheckError,
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

DEFAULT_SERIES_TOL = 1e-6
MAX_CONVOLUTIONS = 10_000

# Sign conditions (monotonicity, convexity, non-negativity) tolerate this
# much numerical wobble; limit conditions (values at the ends) get a looser
# default since they fight grid truncation, not roundoff.
SIGN_TOL = 1e-6
LIMIT_TOL = 1e-3
# Differentiability proxy: a jump between adjacent samples larger than this
# is treated as a discontinuity.
JUMP_TOL = 0.05


@dataclass(frozen=True)
class ShapeReport:
    """Verdict of a functional-shape screen.

    ``checked_conditions`` holds (name, worst_violation, location) triples,
    where violation 0 means clean; ``tolerances`` maps each condition to the
    threshold it was compared against; ``limits`` echoes the first and last
    grid values.
    """

    passed: bool
    checked_conditions: tuple[tuple[str, float, float], ...]
    limits: tuple[float, float]
    tolerances: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def violation(self, name: str) -> float:
        for cond, worst, _ in self.checked_conditions:
            if cond == name:
                return worst
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checked_conditions": [
                {"name": n, "worst_violation": v, "location": loc}
                for n, v, loc in self.checked_conditions
            ],
            "limits": list(self.limits),
            "tolerances": dict(self.tolerances),
            "notes": list(self.notes),
        }


def _finish_report(conds, tols, limits, notes=()) -> ShapeReport:
    passed = all(worst <= tols[name] for name, worst, _ in conds)
    return ShapeReport(
        passed=passed,
        checked_conditions=tuple(conds),
        limits=limits,
        tolerances=tols,
        notes=tuple(notes),
    )


def _sign_condition(name, values, times, upper=True):
    """Worst violation of values <= 0 (upper) or values >= 0 (lower)."""
    excess = values if upper else -values
    idx = int(np.argmax(excess))
    return (name, float(max(excess[idx], 0.0)), float(times[idx]))


# -- series ----------------------------------------------------------------


def _series_truncation_order(F_end: float, tol: float, prefactor: float = 1.0):
    """(order, guaranteed) for the geometric tail bound
    prefactor * F_end^n / (1 - F_end) <= tol.

    When F at the grid end is so close to 1 that the one-step bound would
    need more than the convolution cap, the caller must rely on the
    blockwise stop (grouping terms by the first convolution power whose end
    value has dropped below 1/2); ``guaranteed`` is False in that case and
    exhausting the cap without the blockwise certificate is a resource
    error.
    """
    if F_end <= 0:
        return 1, True
    if F_end >= 1.0 - 1e-12:
        return MAX_CONVOLUTIONS, False
    n = 1
    target = tol / prefactor
    while convolution_tail_bound(F_end, n) > target:
        n += 1
        if n > MAX_CONVOLUTIONS:
            return MAX_CONVOLUTIONS, False
    return n, True


def expected_value_series(dist: SwitchingDistribution, grid: GridSpec,
                          tol: float = DEFAULT_SERIES_TOL) -> GridFunction:
    """E(t) = 1 + 2 sum_{k>=1} (-1)^k F^(k-fold)(t) on the grid.

    The truncation order comes from the geometric tail bound at the grid
    end; on top of that the loop stops as soon as the running term is small
    enough that the product bound certifies the remaining tail below
    ``tol`` (blockwise when F at the grid end is numerically 1).  Total
    truncation error is at most 2*tol on the grid.
    """
    if grid.t0 != 0.0:
        raise InvalidArgumentError("series evaluation requires a grid starting at 0")
    F = tabulate_cdf(dist, grid)
    f = tabulate_pdf(dist, grid)
    F_end = float(F.values[-1])
    n_max, guaranteed = _series_truncation_order(F_end, tol)

    acc = np.zeros(grid.n)
    term = F
    sign = -1.0
    certified = guaranteed
    block = None  # (k*, F^(k*-fold)(t_end)) once the end value drops below 1/2
    for k in range(1, n_max + 1):
        acc += sign * term.values
        term_end = float(term.values[-1])
        term_max = float(term.values.max())
        if block is None and term_end <= 0.5:
            block = (k, term_end)
        if block is not None:
            # tail <= max(term) * k* / (1 - F^(k*-fold)(t_end))
            if term_max * block[0] / (1.0 - block[1]) <= tol:
                certified = True
                break
        if k == n_max:
            break
        term = convolve(term, f)
        sign = -sign
    if not certified:
        raise ResourceLimitError(
            f"series tail not certified within {MAX_CONVOLUTIONS} convolutions "
            f"(F at grid end = {F_end:.6f}); use a shorter grid"
        )

    values = 1.0 + 2.0 * acc
    return GridFunction(t0=0.0, h=grid.h, values=values, notes=f.notes)


def expected_derivative_series(dist: SwitchingDistribution, grid: GridSpec,
                               tol: float = DEFAULT_SERIES_TOL) -> GridFunction:
    """E'(t) = 2 sum_{k>=1} (-1)^k f^(k-fold)(t) on the grid.

    Truncation uses the same geometric bound scaled by sup f (the density
    itself is assumed bounded on the grid; tabulation extrapolates a
    singular origin and flags it).
    """
    if grid.t0 != 0.0:
        raise InvalidArgumentError("series evaluation requires a grid starting at 0")
    f = tabulate_pdf(dist, grid)
    F = tabulate_cdf(dist, grid)
    F_end = float(F.values[-1])
    sup_f = float(f.values.max())
    n_max, guaranteed = _series_truncation_order(F_end, tol, prefactor=max(sup_f, 1e-300))

    acc = np.zeros(grid.n)
    term = f
    sign = -1.0
    certified = guaranteed
    block = None  # (k*, F^(k*-fold)(t_end)): grouping size for the tail bound
    for k in range(1, n_max + 1):
        acc += sign * term.values
        # the integral of the k-fold density power is the k-fold CDF power
        cdf_end = float(integral(term))
        if block is None and cdf_end <= 0.5:
            block = (k, cdf_end)
        if block is not None:
            if float(term.values.max()) * block[0] / (1.0 - block[1]) <= tol:
                certified = True
                break
        if k == n_max:
            break
        term = convolve(term, f)
        sign = -sign
    if not certified:
        raise ResourceLimitError(
            f"density series tail not certified within {MAX_CONVOLUTIONS} convolutions "
            f"(F at grid end = {F_end:.6f}); use a shorter grid"
        )

    return GridFunction(t0=0.0, h=grid.h, values=2.0 * acc, notes=f.notes)


# -- bridges ----------------------------------------------------------------


def covariance_from_expected(E: GridFunction, mu: float) -> GridFunction:
    """C(t) = 1 - (2/mu) * int_0^t E(u) du."""
    if not (mu > 0 and math.isfinite(mu)):
        raise InvalidArgumentError(f"mu must be positive, got {mu}")
    return E.with_values(1.0 - (2.0 / mu) * cumulative_integral(E).values)


def expected_from_covariance(C: GridFunction, mu: float) -> GridFunction:
    """E(t) = -(mu/2) C'(t)."""
    if not (mu > 0 and math.isfinite(mu)):
        raise InvalidArgumentError(f"mu must be positive, got {mu}")
    return C.with_values(-(mu / 2.0) * derivative(C).values)


def covariance_delay_route(E: GridFunction, F: GridFunction, mu: float) -> GridFunction:
    """Covariance via the forward-delay decomposition
    C = 1 - F_A - (E * f_A), with f_A = (1 - F)/mu.

    Independent of :func:`covariance_from_expected`; the two routes agreeing
    is one of the package's consistency checks.
    """
    if not E.same_grid(F):
        raise InvalidArgumentError("E and F must share a grid")
    if not (mu > 0 and math.isfinite(mu)):
        raise InvalidArgumentError(f"mu must be positive, got {mu}")
    f_A = F.with_values((1.0 - F.values) / mu)
    F_A = cumulative_integral(f_A)
    conv = convolve(E, f_A)
    return E.with_values(1.0 - F_A.values - conv.values)


def mean_from_expected(E: GridFunction, decay_threshold: float = 1e-4) -> float:
    """Switching-time mean via mu = 2 * int_0^inf E(u) du.

    The grid integral is trapezoid; the tail past the grid end is estimated
    by fitting log|E| over the last decade of the grid (t in
    [t_end/10, t_end]) and integrating the fitted exponential.  A
    non-decaying fit is refused: the identity needs E to vanish at
    infinity.
    """
    t = E.times()
    vals = E.values
    if abs(vals[-1]) >= decay_threshold:
        warnings.warn(
            f"|E| at the grid end is {abs(vals[-1]):.2e} >= {decay_threshold:.0e}; "
            "the mean estimate may be biased by the tail",
            stacklevel=2,
        )
    window = t >= max(E.t0, E.t_end / 10.0)
    tw, vw = t[window], np.abs(vals[window])
    keep = vw > 1e-300
    if keep.sum() < 3:
        raise NumericError("tail window has too few nonzero samples to fit a decay rate")
    slope, intercept = np.polyfit(tw[keep], np.log(vw[keep]), 1)
    if slope >= 0:
        raise NumericError(
            f"tail of |E| is not decaying (fitted rate {slope:+.3e} per unit time); "
            "refusing to extrapolate the mean integral"
        )
    tail = math.exp(intercept + slope * E.t_end) / (-slope)
    return 2.0 * (integral(E) + tail)


# -- shape screens -----------------------------------------------------------


def check_expected_shape(E: GridFunction, sign_tol: float = SIGN_TOL,
                         limit_tol: float = LIMIT_TOL,
                         jump_tol: float = JUMP_TOL) -> ShapeReport:
    """Screen E for: value 1 at the origin, decay to 0, differentiability
    (proxied by the absence of sample-to-sample jumps), and a non-positive
    derivative."""
    t = E.times()
    v = E.values
    dE = derivative(E)
    jumps = np.abs(np.diff(v))
    j_idx = int(np.argmax(jumps)) if len(jumps) else 0
    conds = [
        ("starts_at_one", abs(float(v[0]) - 1.0), float(t[0])),
        ("decays_to_zero", abs(float(v[-1])), float(t[-1])),
        ("differentiable", float(jumps[j_idx]) if len(jumps) else 0.0, float(t[j_idx])),
        _sign_condition("nonincreasing", dE.values, t, upper=True),
    ]
    tols = {
        "starts_at_one": limit_tol,
        "decays_to_zero": limit_tol,
        "differentiable": jump_tol,
        "nonincreasing": sign_tol,
    }
    return _finish_report(conds, tols, (float(v[0]), float(v[-1])))


def check_covariance_shape(C: GridFunction, sign_tol: float = SIGN_TOL,
                           limit_tol: float = LIMIT_TOL) -> ShapeReport:
    """Screen C for: non-negativity, non-positive slope, convexity, C(0)=1,
    and decay at the grid end.

    The decay condition is not part of the covariance characterization
    itself but is required for divisor recovery (the recovered density must
    integrate to one), so it is screened here and reported separately.
    """
    t = C.times()
    v = C.values
    dC = derivative(C)
    d2C = second_derivative(C)
    conds = [
        _sign_condition("nonnegative", v, t, upper=False),
        _sign_condition("nonincreasing", dC.values, t, upper=True),
        _sign_condition("convex", d2C.values, t, upper=False),
        ("starts_at_one", abs(float(v[0]) - 1.0), float(t[0])),
        ("decays_to_zero", abs(float(v[-1])), float(t[-1])),
    ]
    tols = {
        "nonnegative": sign_tol,
        "nonincreasing": sign_tol,
        "convex": sign_tol,
        "starts_at_one": limit_tol,
        "decays_to_zero": limit_tol,
    }
    return _finish_report(conds, tols, (float(v[0]), float(v[-1])))


# -- divisor recovery --------------------------------------------------------


def _renormalized_density(f: GridFunction, what: str) -> GridFunction:
    mass = integral(f)
    if abs(mass - 1.0) > 1e-3:
        raise NumericError(
            f"{what}: recovered density mass {mass:.6f} is off unit by more than 1e-3; "
            "not renormalizing silently"
        )
    vals = np.maximum(f.values, 0.0) / mass
    return f.with_values(vals)


def divisor_from_expected(E: GridFunction, sign_tol: float = SIGN_TOL,
                          limit_tol: float = LIMIT_TOL):
    """(divisor CDF, divisor density) read off a monotone expected value:
    CDF = 1 - E, density = -E'.

    Refuses when the shape screen fails, since the divisor representation
    only exists for non-negative decreasing E.  The density is renormalized
    exactly when its mass is within 1e-3 of one; larger discrepancies are
    errors.
    """
    report = check_expected_shape(E, sign_tol=sign_tol, limit_tol=limit_tol)
    if not report.passed:
        raise ShapeCheckError(
            "expected value fails the monotone-shape screen; no 2-geometric divisor exists",
            report=report,
        )
    F_div = E.with_values(np.clip(1.0 - E.values, 0.0, None))
    f_div = _renormalized_density(E.with_values(-derivative(E).values), "divisor_from_expected")
    return F_div, f_div


def divisor_from_covariance(C: GridFunction, sign_tol: float = SIGN_TOL,
                            limit_tol: float = LIMIT_TOL,
                            mu_mismatch_tol: float = 1e-2):
    """(mu, divisor CDF, divisor density) from a stationary covariance:
    mu = -2/C'(0), CDF = 1 + (mu/2) C', density = (mu/2) C''.

    The slope at the origin pins mu because the divisor CDF must vanish
    there.  The estimate is cross-validated against the integral identity
    mu = 2 int E with E = -(mu/2) C'; a relative mismatch beyond
    ``mu_mismatch_tol`` raises with both estimates attached.
    """
    report = check_covariance_shape(C, sign_tol=sign_tol, limit_tol=limit_tol)
    if not report.passed:
        raise ShapeCheckError(
            "covariance fails the shape screen; divisor recovery refused",
            report=report,
        )
    dC = derivative(C)
    slope0 = float(dC.values[0])
    if not slope0 < 0:
        raise NumericError(f"C'(0) = {slope0:.3e} is not negative; mu is undefined")
    mu = -2.0 / slope0

    E = C.with_values(-(mu / 2.0) * dC.values)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        mu_integral = mean_from_expected(E)
    if abs(mu_integral - mu) > mu_mismatch_tol * mu:
        raise NumericError(
            f"mean cross-validation failed: slope route {mu:.6g}, "
            f"integral route {mu_integral:.6g} (relative mismatch "
            f"{abs(mu_integral - mu) / mu:.3e} > {mu_mismatch_tol:.0e})"
        )

    # F(0) = 0 exactly: mu was built from the same stencil value of C'(0).
    F_div = C.with_values(np.maximum.accumulate(np.clip(1.0 + (mu / 2.0) * dC.values, 0.0, 1.0)))
    f_div = _renormalized_density(
        C.with_values((mu / 2.0) * second_derivative(C).values), "divisor_from_covariance"
    )
    return mu, F_div, f_div


def switching_law_from_divisor(divisor: SwitchingDistribution) -> GeometricCompound:
    """The switching-time law whose 2-geometric divisor is ``divisor``.

    Sampler and transform are exact.  No closed-form density exists; a
    time-domain density can be approximated by inverting the transform or by
    tabulating the geometric convolution series.
    """
    return make_geometric_compound(divisor, r=2.0)
