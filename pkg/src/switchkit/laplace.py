"""Laplace-domain relations, numerical inversion and the complete
monotonicity screen.

The relations connect three transforms: psi(s) of the switching-time law,
L(E)(s) of the switch-process expected value, and L(C)(s) of the stationary
covariance.  All three are represented as :class:`LaplaceFunction` wrappers
around vectorized evaluators.

Inversion uses the fixed Talbot contour.  The contour weights grow like
exp(2M/5), so at the default node count the sum is accumulated in extended
precision (clongdouble); plain double precision would lose ~5 digits to
cancellation at M=64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .grid import GridFunction, GridSpec

_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class LaplaceFunction:
    """An evaluable transform s -> value for s > domain_floor.

    Evaluators must be pure and vectorized and should accept complex input
    with positive real part (required for contour inversion).
    """

    fn: object
    domain_floor: float = 0.0
    name: str = ""

    def __call__(self, s):
        return self.fn(s)


def as_laplace(fn, name: str = "") -> LaplaceFunction:
    if isinstance(fn, LaplaceFunction):
        return fn
    return LaplaceFunction(fn=fn, name=name)


def expected_laplace_from_psi(psi) -> LaplaceFunction:
    """L(E)(s) = (1/s) (1 - psi(s)) / (1 + psi(s)).

    Maps the switching-time transform to the transform of the expected value
    of the switch process.  The denominator stays >= 1 for genuine transforms,
    so no guard is needed.
    """
    psi = as_laplace(psi)

    def fn(s):
        v = psi(s)
        return (1.0 - v) / (1.0 + v) / s

    return LaplaceFunction(fn=fn, domain_floor=psi.domain_floor, name=f"LE[{psi.name}]")


def psi_from_expected_laplace(le) -> LaplaceFunction:
    """psi(s) = (1 - s L(E)(s)) / (1 + s L(E)(s)); inverse of
    :func:`expected_laplace_from_psi`.

    For real s the product s*L(E)(s) must lie in [-1, 1]; points violating
    that are marked NaN rather than raising so a scan over s can proceed.
    """
    le = as_laplace(le)

    def fn(s):
        s_arr = np.asarray(s)
        prod = s_arr * le(s)
        out = (1.0 - prod) / (1.0 + prod)
        if not np.iscomplexobj(prod):
            bad = np.abs(prod) > 1.0 + 1e-12
            if np.any(bad):
                out = np.where(bad, np.nan, out)
        return out if np.asarray(s).ndim else out[()]

    return LaplaceFunction(fn=fn, domain_floor=le.domain_floor, name=f"psi[{le.name}]")


def covariance_laplace(le, mu: float) -> LaplaceFunction:
    """L(C)(s) = (1/s) (1 - (2/mu) L(E)(s)) for the stationary covariance."""
    if not (mu > 0 and math.isfinite(mu)):
        raise InvalidArgumentError(f"mu must be positive, got {mu}")
    le = as_laplace(le)

    def fn(s):
        return (1.0 - (2.0 / mu) * le(s)) / s

    return LaplaceFunction(fn=fn, domain_floor=le.domain_floor, name=f"LC[{le.name}]")


def _eval_maybe_vector(fn, arr: np.ndarray) -> np.ndarray:
    """Evaluate fn on an array, falling back to elementwise calls."""
    try:
        out = np.asarray(fn(arr))
        if out.shape == arr.shape:
            return out
    except (TypeError, ValueError):
        pass
    flat = np.array([fn(x) for x in arr.ravel()])
    return flat.reshape(arr.shape)


def invert_laplace(fn, grid: GridSpec, nodes: int = 64) -> GridFunction:
    """Fixed-Talbot inversion of ``fn`` on a grid of positive times.

    Each time is handled independently with ``nodes`` contour points, so the
    result is deterministic for a fixed node count and trivially
    grid-point-parallel.  Points where the contour sum is not finite are
    marked NaN (with a note) instead of aborting the whole grid.

    The caller asserts analyticity of ``fn`` to the right of the contour.
    """
    fn = as_laplace(fn)
    if nodes < 4:
        raise InvalidArgumentError(f"need at least 4 contour nodes, got {nodes}")
    if grid.t0 <= 0:
        raise InvalidArgumentError("inversion grid must start at t0 > 0")
    t = grid.times().astype(np.longdouble)
    M = int(nodes)
    theta = (np.pi * np.arange(M, dtype=np.longdouble)) / M
    cot = np.zeros(M, dtype=np.longdouble)
    cot[1:] = 1.0 / np.tan(theta[1:])
    r = np.longdouble(2 * M) / np.longdouble(5)

    # contour points: p[k] = (r/t) theta_k (cot theta_k + i), p[0] = r/t
    base = theta * (cot + 1j)
    base[0] = 1.0
    p = np.multiply.outer(r / t, base).astype(np.clongdouble)
    F = _eval_maybe_vector(fn.fn, p).astype(np.clongdouble)

    gamma = np.empty_like(p)
    gamma[:, 0] = 0.5 * np.exp(p[:, 0] * t)
    weights = 1.0 + 1j * theta[1:] * (1.0 + cot[1:] ** 2) - 1j * cot[1:]
    gamma[:, 1:] = np.exp(p[:, 1:] * t[:, None]) * weights[None, :]

    # non-finite transform values propagate to per-point NaN markers below
    with np.errstate(invalid="ignore", over="ignore"):
        vals = (2.0 / (5.0 * t)) * np.sum(gamma * F, axis=1).real
    vals = vals.astype(float)
    finite = np.isfinite(vals)
    if finite.all():
        return GridFunction(t0=grid.t0, h=grid.h, values=vals)
    vals = np.where(finite, vals, np.nan)
    note = f"inversion failed at {int((~finite).sum())} of {grid.n} grid points (NaN markers)"
    return GridFunction(t0=grid.t0, h=grid.h, values=vals, notes=(note,), nan_ok=True)


@dataclass(frozen=True)
class CMConfig:
    """Settings for the complete-monotonicity screen.

    The default s-grid (40 log-spaced points spanning [1e-2, 1e2]) straddles
    both the small-s and large-s behavior of the transform.
    """

    s_grid: tuple[float, ...] = tuple(np.logspace(-2, 2, 40))
    max_order: int = 6
    tol: float = 1e-7
    noise_guard: float = 1e3

    def __post_init__(self):
        if self.max_order > 8:
            raise InvalidArgumentError("finite differences beyond order 8 are pure noise")
        if any(s <= 0 for s in self.s_grid):
            raise InvalidArgumentError("s grid must be strictly positive")
        if list(self.s_grid) != sorted(self.s_grid):
            raise InvalidArgumentError("s grid must be ascending")


@dataclass(frozen=True)
class CMReport:
    """Outcome of the alternating-sign derivative screen.

    A pass means "no violation found at the sampled points and orders"; it is
    a necessary-condition screen, never a certification (finite sampling
    cannot certify complete monotonicity).
    """

    passed: bool
    max_order_checked: int
    worst_violation: float
    violation_points: tuple[tuple[float, int], ...]
    tolerance: float = 1e-7

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_order_checked": self.max_order_checked,
            "worst_violation": self.worst_violation,
            "violation_points": [list(p) for p in self.violation_points],
            "tolerance": self.tolerance,
        }


def cm_check(fn, s_grid=None, max_order: int = 6, tol: float = 1e-7,
             noise_guard: float = 1e3) -> CMReport:
    """Screen (-1)^n f^(n)(s) >= 0 for n = 0..max_order over an s grid.

    Derivatives are approximated by central alternating differences with
    step max(1e-2*s, 1e-3).  An n-th difference carries rounding noise of
    order 2^n * eps * |f| before division by h^n, which at high order and
    small s dwarfs the true derivative; each comparison therefore subtracts
    a noise allowance of ``noise_guard`` times that floor, so only
    violations that exceed what roundoff can produce are reported.
    Violations are normalized by |f(s)| + 1.
    """
    fn = as_laplace(fn)
    if s_grid is None:
        s_grid = CMConfig().s_grid
    cfg = CMConfig(s_grid=tuple(float(s) for s in s_grid), max_order=max_order,
                   tol=tol, noise_guard=noise_guard)

    s_arr = np.asarray(cfg.s_grid)
    h = np.maximum(1e-2 * s_arr, 1e-3)
    f_at_s = np.abs(_eval_maybe_vector(fn.fn, s_arr))
    scale = f_at_s + 1.0

    worst = -math.inf
    points: list[tuple[float, int]] = []
    for n in range(cfg.max_order + 1):
        offsets = n / 2.0 - np.arange(n + 1)
        coef = np.array([(-1.0) ** j * math.comb(n, j) for j in range(n + 1)])
        nodes = s_arr[:, None] + offsets[None, :] * h[:, None]
        fvals = _eval_maybe_vector(fn.fn, nodes)
        dn = fvals @ coef  # ~ f^(n)(s) h^n
        signed = ((-1.0) ** n) * dn / h**n
        guard = cfg.noise_guard * (2.0**n) * _EPS * scale / h**n
        viol = (-signed - guard) / scale
        worst = max(worst, float(np.max(viol)))
        for idx in np.nonzero(viol > cfg.tol)[0]:
            points.append((float(s_arr[idx]), n))

    return CMReport(
        passed=worst <= cfg.tol,
        max_order_checked=cfg.max_order,
        worst_violation=worst,
        violation_points=tuple(points),
        tolerance=cfg.tol,
    )
