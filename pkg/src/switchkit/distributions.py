"""Switching-time distributions: analytic families, tabulated laws and
geometric compounds.

Every distribution bundles a density, a CDF, a Laplace transform, a mean and
a sampler.  Laplace evaluators accept real or complex arguments (complex
support is what lets the contour inversion in :mod:`switchkit.laplace` work
on them).

Randomness contract: samplers draw from a caller-owned
``numpy.random.Generator``.  :func:`make_rng` builds one from an explicit
64-bit seed on top of the Philox counter-based bit generator, and
:func:`path_rng` derives independent per-path streams with
``SeedSequence(seed, spawn_key=(path_index,))`` so parallel workers can
consume disjoint streams in any order.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import InvalidArgumentError, ResourceLimitError
from .grid import GridFunction, GridSpec, convolve, cumulative_integral

# Mass discrepancy above this is an error; below it the density is
# renormalized exactly.
MASS_TOLERANCE = 1e-3

_REJECTION_CAP = 100_000


def make_rng(seed, stream: tuple[int, ...] = ()) -> np.random.Generator:
    """Generator over Philox seeded from an explicit seed.

    ``seed`` may be an int, a SeedSequence, or an existing Generator (passed
    through unchanged, which lets samplers accept either form).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        seq = seed
    else:
        seq = np.random.SeedSequence(seed, spawn_key=stream)
    return np.random.Generator(np.random.Philox(seq))


def path_rng(seed: int, path_index: int) -> np.random.Generator:
    """Independent stream for one path: SeedSequence(seed, spawn_key=(path_index,))."""
    if isinstance(seed, np.random.Generator):
        raise InvalidArgumentError(
            "per-path streams derive from an integer seed, not a live Generator"
        )
    return make_rng(seed, stream=(path_index,))


@dataclass(frozen=True)
class SwitchingDistribution:
    """A positive switching-time law.

    ``pdf``/``cdf`` may be None when no pointwise form exists (geometric
    compounds); grid tabulations are then obtained via :func:`tabulate_pdf`.
    ``sampler(rng, size)`` returns positive draws; ``size_biased_sampler``
    draws from the length-biased law t*f(t)/mean and is required by the
    stationary-process simulator.
    """

    name: str
    mean: float
    laplace: Callable
    pdf: Callable | None = None
    cdf: Callable | None = None
    sampler: Callable | None = None
    size_biased_sampler: Callable | None = None

    def __post_init__(self):
        if not (self.mean > 0 and math.isfinite(self.mean)):
            raise InvalidArgumentError(f"mean must be in (0, inf), got {self.mean}")

    def sample(self, seed_or_rng, size: int | None = None):
        if self.sampler is None:
            raise InvalidArgumentError(f"{self.name}: no sampler available")
        rng = make_rng(seed_or_rng)
        return self.sampler(rng, size)

    def sample_size_biased(self, seed_or_rng, size: int | None = None):
        if self.size_biased_sampler is None:
            raise InvalidArgumentError(
                f"{self.name}: no size-biased sampler; stationary simulation "
                "needs a density (analytic or tabulated)"
            )
        rng = make_rng(seed_or_rng)
        return self.size_biased_sampler(rng, size)


@dataclass(frozen=True)
class GeometricCompound(SwitchingDistribution):
    """Sum of a Geometric(p=1/r) number of i.i.d. divisor draws.

    The transform is exact, the sampler is exact, the mean is r times the
    divisor mean; no closed-form density exists, so ``pdf``/``cdf`` are None
    and grid tabulations go through the convolution series in
    :func:`tabulate_pdf`.
    """

    divisor: SwitchingDistribution = None
    r: float = 2.0

    def __post_init__(self):
        super().__post_init__()
        if self.divisor is None:
            raise InvalidArgumentError("GeometricCompound requires a divisor")
        if not self.r > 1:
            raise InvalidArgumentError(f"r must be > 1, got {self.r}")


def make_exponential(rate: float) -> SwitchingDistribution:
    """Exponential switching times with the given intensity."""
    if not (rate > 0 and math.isfinite(rate)):
        raise InvalidArgumentError(f"rate must be positive, got {rate}")
    rate = float(rate)

    def pdf(t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, rate * np.exp(-rate * np.maximum(t, 0.0)), 0.0)

    def cdf(t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, -np.expm1(-rate * np.maximum(t, 0.0)), 0.0)

    def laplace(s):
        return rate / (rate + np.asarray(s))

    def sampler(rng, size=None):
        return rng.exponential(1.0 / rate, size=size)

    def size_biased(rng, size=None):
        # t * rate e^{-rate t} is a shape-2 gamma density.
        return rng.gamma(2.0, 1.0 / rate, size=size)

    return SwitchingDistribution(
        name=f"exp(rate={rate:g})",
        mean=1.0 / rate,
        laplace=laplace,
        pdf=pdf,
        cdf=cdf,
        sampler=sampler,
        size_biased_sampler=size_biased,
    )


def make_gamma(shape: float, scale: float) -> SwitchingDistribution:
    """Gamma switching times; transform (1 + scale*s)^(-shape), mean shape*scale."""
    if not (shape > 0 and math.isfinite(shape)):
        raise InvalidArgumentError(f"shape must be positive, got {shape}")
    if not (scale > 0 and math.isfinite(scale)):
        raise InvalidArgumentError(f"scale must be positive, got {scale}")
    shape, scale = float(shape), float(scale)
    log_norm = gammaln(shape) + shape * math.log(scale)

    def pdf(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            logp = (shape - 1.0) * np.log(t) - t / scale - log_norm
            out = np.exp(logp)
        if shape > 1:
            out = np.where(t > 0, out, 0.0)
        elif shape == 1:
            out = np.where(t >= 0, np.exp(-np.maximum(t, 0.0) / scale) / scale, 0.0)
        else:
            # integrable singularity at the origin
            out = np.where(t > 0, out, np.inf)
        return np.where(t < 0, 0.0, out)

    def cdf(t):
        t = np.asarray(t, dtype=float)
        return gammainc(shape, np.maximum(t, 0.0) / scale)

    def laplace(s):
        return (1.0 + scale * np.asarray(s)) ** (-shape)

    def sampler(rng, size=None):
        return rng.gamma(shape, scale, size=size)

    def size_biased(rng, size=None):
        # t^shape e^{-t/scale} is a shape+1 gamma density.
        return rng.gamma(shape + 1.0, scale, size=size)

    return SwitchingDistribution(
        name=f"gamma(shape={shape:g},scale={scale:g})",
        mean=shape * scale,
        laplace=laplace,
        pdf=pdf,
        cdf=cdf,
        sampler=sampler,
        size_biased_sampler=size_biased,
    )


def make_tabulated(pdf: GridFunction) -> SwitchingDistribution:
    """Switching-time law from a density tabulated on a uniform grid.

    The tabulated mass must be within ``MASS_TOLERANCE`` of one; it is then
    renormalized exactly.  The CDF is the trapezoid antiderivative, the
    transform is trapezoid quadrature of e^{-s t} f(t) on the stored grid
    (truncation beyond the grid is bounded by exp(-s * t_end)), and sampling
    inverts the CDF with linear interpolation.
    """
    if pdf.t0 != 0.0:
        raise InvalidArgumentError("tabulated densities must start at t0=0")
    vals = np.array(pdf.values, dtype=float)
    if np.min(vals) < -1e-9:
        raise InvalidArgumentError(
            f"density has negative mass points (min {np.min(vals):.3e})"
        )
    vals = np.maximum(vals, 0.0)
    t = pdf.times()
    weights = np.full_like(vals, pdf.h)
    weights[0] = weights[-1] = pdf.h / 2
    mass = float(np.dot(weights, vals))
    if abs(mass - 1.0) > MASS_TOLERANCE:
        raise InvalidArgumentError(
            f"tabulated density mass {mass:.6f} deviates from 1 by more than {MASS_TOLERANCE}"
        )
    vals = vals / mass
    density = GridFunction(t0=0.0, h=pdf.h, values=vals, notes=pdf.notes)
    cdf_grid = cumulative_integral(density)
    cdf_vals = np.minimum(cdf_grid.values, 1.0)
    mean = float(np.dot(weights, t * vals))
    wv = weights * vals

    def pdf_fn(x):
        return np.interp(x, t, vals, left=0.0, right=0.0)

    def cdf_fn(x):
        return np.interp(x, t, cdf_vals, left=0.0, right=1.0)

    def _kernel(z):
        # contour evaluation visits Re(s) << 0 where the truncated transform
        # blows up; clip the exponent so those (negligibly weighted) nodes
        # stay finite instead of poisoning sums with inf - inf
        if np.iscomplexobj(z):
            z = z.copy()
            z.real = np.minimum(z.real, 700.0)
            return np.exp(z)
        return np.exp(np.minimum(z, 700.0))

    def laplace(s):
        s_arr = np.asarray(s)
        if s_arr.ndim == 0:
            return np.dot(_kernel(-s_arr * t), wv)
        # block the outer product so contour-matrix inputs stay in memory
        flat = s_arr.ravel()
        out = np.empty(flat.shape, dtype=np.result_type(flat.dtype, float))
        for lo in range(0, flat.size, 64):
            blk = flat[lo : lo + 64]
            out[lo : lo + 64] = _kernel(-np.multiply.outer(blk, t)) @ wv
        return out.reshape(s_arr.shape)

    def sampler(rng, size=None):
        u = rng.random(size)
        return np.interp(u, cdf_vals, t)

    t_end = float(t[-1])
    envelope = float(np.max(t * vals)) / mean  # sup of the size-biased density

    def size_biased(rng, size=None):
        # Rejection against a uniform proposal on [0, t_end]; the target
        # t*f(t)/mean is bounded by the envelope.
        n = 1 if size is None else int(size)
        out = np.empty(n)
        filled = 0
        attempts = 0
        while filled < n:
            block = max(64, 2 * (n - filled))
            attempts += block
            if attempts > _REJECTION_CAP * max(n, 1):
                raise ResourceLimitError(
                    f"size-biased rejection sampler exceeded {_REJECTION_CAP} proposals per draw"
                )
            cand = rng.random(block) * t_end
            accept = rng.random(block) * envelope <= cand * pdf_fn(cand) / mean
            good = cand[accept]
            take = min(len(good), n - filled)
            out[filled : filled + take] = good[:take]
            filled += take
        return float(out[0]) if size is None else out

    return SwitchingDistribution(
        name="tabulated",
        mean=mean,
        laplace=laplace,
        pdf=pdf_fn,
        cdf=cdf_fn,
        sampler=sampler,
        size_biased_sampler=size_biased,
    )


def make_geometric_compound(divisor: SwitchingDistribution, r: float) -> GeometricCompound:
    """Geometric(p=1/r) compound of i.i.d. divisor draws.

    Transform: (psi/r) / (1 - (1 - 1/r) psi) where psi is the divisor
    transform.  The geometric count is drawn by inversion,
    nu = 1 + floor(log U / log(1-p)), so a fixed uniform stream reproduces
    identical counts on any platform.
    """
    if not (r > 1 and math.isfinite(r)):
        raise InvalidArgumentError(f"r must be > 1, got {r}")
    r = float(r)
    p = 1.0 / r
    log_q = math.log1p(-p)
    div_laplace = divisor.laplace

    def laplace(s):
        # algebraically (psi/r) / (1 - (1-p) psi); this form stays finite
        # when an approximate divisor transform blows up off-axis
        psi = div_laplace(s)
        with np.errstate(divide="ignore"):
            return 1.0 / (r / psi - (r - 1.0))

    def draw_counts(rng, n):
        u = rng.random(n)
        u = np.maximum(u, 1e-300)  # U=0 would give an infinite count
        return 1 + np.floor(np.log(u) / log_q).astype(np.int64)

    def sampler(rng, size=None):
        if size is None:
            nu = int(draw_counts(rng, 1)[0])
            return float(np.sum(divisor.sample(rng, nu)))
        counts = draw_counts(rng, int(size))
        draws = divisor.sample(rng, int(counts.sum()))
        edges = np.concatenate([[0], np.cumsum(counts)[:-1]])
        return np.add.reduceat(draws, edges)

    return GeometricCompound(
        name=f"compound(r={r:g},divisor={divisor.name})",
        mean=r * divisor.mean,
        laplace=laplace,
        sampler=sampler,
        divisor=divisor,
        r=r,
    )


# -- grid tabulation ------------------------------------------------------


def tabulate_pdf(dist: SwitchingDistribution, grid: GridSpec) -> GridFunction:
    """Density of ``dist`` on a uniform grid.

    Analytic and tabulated laws are evaluated pointwise; an integrable
    singularity at the origin is replaced by one-sided extrapolation and
    flagged in ``notes``.  Geometric compounds have no pointwise density, so
    their grid density is assembled from the geometrically weighted
    convolution powers of the divisor density.
    """
    if isinstance(dist, GeometricCompound):
        return _compound_pdf_grid(dist, grid)
    if dist.pdf is None:
        raise InvalidArgumentError(f"{dist.name}: no density available for tabulation")
    t = grid.times()
    vals = np.asarray(dist.pdf(t), dtype=float)
    notes: tuple[str, ...] = ()
    if not np.isfinite(vals[0]):
        if len(vals) < 3 or not np.isfinite(vals[1:3]).all():
            raise InvalidArgumentError(f"{dist.name}: density not finite beyond the origin")
        vals = vals.copy()
        vals[0] = max(2 * vals[1] - vals[2], 0.0)
        notes = ("origin value set by one-sided extrapolation (singular density)",)
    if not np.isfinite(vals).all():
        raise InvalidArgumentError(f"{dist.name}: density not finite on the grid interior")
    return GridFunction(t0=grid.t0, h=grid.h, values=vals, notes=notes)


def tabulate_cdf(dist: SwitchingDistribution, grid: GridSpec) -> GridFunction:
    """Distribution function of ``dist`` on a uniform grid."""
    if isinstance(dist, GeometricCompound):
        pdf = _compound_pdf_grid(dist, grid)
        cdf = cumulative_integral(pdf)
        return cdf.with_values(np.minimum(cdf.values, 1.0))
    if dist.cdf is None:
        raise InvalidArgumentError(f"{dist.name}: no distribution function available")
    t = grid.times()
    return GridFunction(t0=grid.t0, h=grid.h, values=np.asarray(dist.cdf(t), dtype=float))


def _compound_pdf_grid(
    dist: GeometricCompound, grid: GridSpec, weight_tol: float = 1e-12
) -> GridFunction:
    """Grid density of a geometric compound via divisor convolution powers.

    f_W = p * sum_{n>=1} (1-p)^(n-1) f~^(n-fold); the dropped weight after N
    terms is (1-p)^N, which is driven below ``weight_tol``.  The loop also
    stops once the dropped terms cannot reach weight_tol on the grid: every
    later power is bounded on [0, t_end] by the current power's maximum, so
    the dropped sum is below (remaining weight) * max(term).
    """
    if grid.t0 != 0.0:
        raise InvalidArgumentError("compound tabulation requires a grid starting at 0")
    p = 1.0 / dist.r
    q = 1.0 - p
    base = tabulate_pdf(dist.divisor, grid)
    n_terms = max(1, int(math.ceil(math.log(weight_tol) / math.log(q))))
    acc = np.zeros(grid.n)
    term = base
    weight = p
    for k in range(1, n_terms + 1):
        acc += weight * term.values
        weight *= q
        if k == n_terms or weight / p * float(term.values.max()) <= weight_tol:
            break
        term = convolve(term, base)
    return GridFunction(t0=0.0, h=grid.h, values=acc, notes=base.notes)


# -- string DSL used by the CLI -------------------------------------------

_CALL_RE = re.compile(r"^\s*([a-zA-Z_][a-zA-Z0-9_-]*)\s*\((.*)\)\s*$", re.S)


def _split_top_level(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if cur:
        parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def parse_distribution(spec: str) -> SwitchingDistribution:
    """Parse specs like ``exp(rate=1)``, ``gamma(shape=2,scale=2)``,
    ``compound(r=2,divisor=exp(rate=2))`` or ``table(path.csv)``."""
    m = _CALL_RE.match(spec)
    if not m:
        raise InvalidArgumentError(f"cannot parse distribution spec {spec!r}")
    head, body = m.group(1), m.group(2)
    if head == "table":
        path = body.strip()
        if not path:
            raise InvalidArgumentError("table(...) needs a CSV path")
        return make_tabulated(GridFunction.from_csv(path))
    kwargs: dict[str, object] = {}
    for part in _split_top_level(body):
        if "=" not in part:
            raise InvalidArgumentError(f"expected key=value in {part!r}")
        key, value = part.split("=", 1)
        key = key.strip()
        value = value.strip()
        if _CALL_RE.match(value):
            kwargs[key] = parse_distribution(value)
        else:
            try:
                kwargs[key] = float(value)
            except ValueError as exc:
                raise InvalidArgumentError(f"bad numeric value {value!r} in {spec!r}") from exc
    try:
        if head == "exp":
            return make_exponential(**kwargs)
        if head == "gamma":
            return make_gamma(**kwargs)
        if head == "compound":
            return make_geometric_compound(**kwargs)
    except TypeError as exc:
        raise InvalidArgumentError(f"bad arguments for {head!r}: {exc}") from exc
    raise InvalidArgumentError(f"unknown distribution family {head!r}")
