"""Geometric divisibility: divisor extraction, membership screening and
order reduction.

A law is r-geometric divisible when it is a Geometric(1/r) compound of some
positive law, equivalently when the extracted divisor transform
r*psi / (1 + (r-1)*psi) is completely monotone and equals one at s=0.
Membership here is a numerical screen over a finite s grid, so a pass is
"no violation found", not a certification.  Non-integer r is permitted
throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .distributions import SwitchingDistribution
from .errors import InvalidArgumentError
from .laplace import CMConfig, CMReport, LaplaceFunction, as_laplace, cm_check


@dataclass(frozen=True)
class DivisibilityReport:
    r: float
    passed: bool
    cm_report: CMReport
    laplace_at_zero: float
    zero_tolerance: float = 1e-6

    def to_json_dict(self) -> dict:
        return {
            "r": self.r,
            "passed": self.passed,
            "laplace_at_zero": self.laplace_at_zero,
            "zero_tolerance": self.zero_tolerance,
            "cm_report": self.cm_report.to_json_dict(),
        }


def divisor_laplace(psi, r: float) -> LaplaceFunction:
    """Transform of the order-r divisor: r*psi(s) / (1 + (r-1)*psi(s))."""
    if not (r > 1 and math.isfinite(r)):
        raise InvalidArgumentError(f"r must be > 1, got {r}")
    psi = as_laplace(psi)

    def fn(s):
        v = psi(s)
        return r * v / (1.0 + (r - 1.0) * v)

    return LaplaceFunction(fn=fn, domain_floor=psi.domain_floor, name=f"divisor[r={r:g}]")


def gd_check(dist: SwitchingDistribution, r: float, cfg: CMConfig | None = None,
             zero_tol: float = 1e-6) -> DivisibilityReport:
    """Screen whether ``dist`` is r-geometric divisible.

    Runs the complete-monotonicity screen on the extracted divisor transform
    and checks the s=0 normalization.
    """
    cfg = cfg or CMConfig()
    candidate = divisor_laplace(dist.laplace, r)
    report = cm_check(candidate, s_grid=cfg.s_grid, max_order=cfg.max_order,
                      tol=cfg.tol, noise_guard=cfg.noise_guard)
    at_zero = float(candidate(0.0))
    passed = report.passed and abs(at_zero - 1.0) <= zero_tol
    return DivisibilityReport(
        r=float(r),
        passed=passed,
        cm_report=report,
        laplace_at_zero=at_zero,
        zero_tolerance=zero_tol,
    )


def reduce_order(divisor_psi, r: float, u: float) -> LaplaceFunction:
    """Transform of the order-u divisor of the same compound law, 1 < u <= r.

    The order-u divisor is itself a (u/r)-geometric compound of the order-r
    divisor: (u/r) psi / (1 - (1 - u/r) psi).
    """
    if not (r > 1 and math.isfinite(r)):
        raise InvalidArgumentError(f"r must be > 1, got {r}")
    if not (1 < u <= r):
        raise InvalidArgumentError(f"u must lie in (1, r], got u={u}, r={r}")
    ratio = u / r
    divisor_psi = as_laplace(divisor_psi)

    def fn(s):
        v = divisor_psi(s)
        return ratio * v / (1.0 - (1.0 - ratio) * v)

    return LaplaceFunction(fn=fn, domain_floor=divisor_psi.domain_floor,
                           name=f"reduced[u={u:g}]")
