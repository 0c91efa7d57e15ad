"""Uniform-grid function representation and its numeric operations.

A :class:`GridFunction` tabulates a real function on a uniform time grid and
is the numeric currency passed between modules.  All operations are pure:
values are never mutated after construction, so instances are safe to share
across threads.

Convolution, integration and differentiation all use the trapezoid rule /
second-order stencils; second-order accuracy keeps convolutions exactly
symmetric and is sufficient for the tolerances this package targets.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .errors import DomainError, InvalidArgumentError

# Direct summation below this length; FFT above.  Both evaluate the same
# discrete sum (verified to 1e-10 in the test suite), FFT is just faster.
_FFT_THRESHOLD = 256


@dataclass(frozen=True)
class GridSpec:
    """A uniform grid: n samples starting at t0 with step h."""

    h: float
    n: int
    t0: float = 0.0

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise InvalidArgumentError(f"grid step must be positive and finite, got {self.h}")
        if self.n < 1:
            raise InvalidArgumentError(f"grid needs at least one sample, got n={self.n}")
        if not math.isfinite(self.t0) or self.t0 < 0:
            raise InvalidArgumentError(f"grid start must be finite and >= 0, got {self.t0}")

    @classmethod
    def from_t_end(cls, t_end: float, h: float, t0: float = 0.0) -> "GridSpec":
        if t_end <= t0:
            raise InvalidArgumentError(f"t_end={t_end} must exceed t0={t0}")
        n = int(round((t_end - t0) / h)) + 1
        return cls(h=h, n=n, t0=t0)

    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.n)

    @property
    def t_end(self) -> float:
        return self.t0 + self.h * (self.n - 1)


@dataclass(frozen=True)
class GridFunction:
    """Real samples v[i] ~ g(t0 + i*h) on a uniform grid.

    Invariants: h > 0, values non-empty and finite.  Two instances are
    combinable only when t0, h and length all agree.  ``notes`` carries
    non-numeric annotations (e.g. extrapolation warnings) and does not
    affect combinability or equality of the numeric payload.
    """

    t0: float
    h: float
    values: np.ndarray
    notes: tuple[str, ...] = ()
    # Inversion marks per-point failures with NaN instead of aborting; only
    # invert_laplace sets this.  NaN-carrying functions are rejected by the
    # grid algebra below.
    nan_ok: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise InvalidArgumentError("values must be a non-empty 1-d array")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise InvalidArgumentError(f"grid step must be positive and finite, got {self.h}")
        if not math.isfinite(self.t0):
            raise InvalidArgumentError(f"t0 must be finite, got {self.t0}")
        if np.isinf(vals).any():
            raise InvalidArgumentError("values must not contain infinities")
        if not self.nan_ok and np.isnan(vals).any():
            raise InvalidArgumentError("values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def t_end(self) -> float:
        return self.t0 + self.h * (len(self.values) - 1)

    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(len(self.values))

    def spec(self) -> GridSpec:
        return GridSpec(h=self.h, n=len(self.values), t0=self.t0)

    def same_grid(self, other: "GridFunction") -> bool:
        return (
            self.t0 == other.t0
            and self.h == other.h
            and len(self.values) == len(other.values)
        )

    def interp(self, t) -> np.ndarray:
        """Linear interpolation at arbitrary times (constant beyond the ends)."""
        return np.interp(t, self.times(), self.values)

    def with_values(self, values, notes: tuple[str, ...] | None = None) -> "GridFunction":
        return GridFunction(
            t0=self.t0,
            h=self.h,
            values=np.asarray(values, dtype=float),
            notes=self.notes if notes is None else notes,
        )

    # -- serialization ----------------------------------------------------

    def to_csv(self, path, extra_columns: dict[str, np.ndarray] | None = None) -> None:
        """Write ``t,value[,...]`` rows in full-precision scientific notation."""
        extra = extra_columns or {}
        header = ["t", "value", *extra.keys()]
        cols = [self.times(), self.values, *extra.values()]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in zip(*cols):
                writer.writerow([f"{x:.17e}" for x in row])

    @classmethod
    def from_csv(cls, path) -> "GridFunction":
        """Read a ``t,value`` CSV (extra columns are ignored)."""
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if len(header) < 2 or header[0] != "t" or header[1] != "value":
                raise InvalidArgumentError(f"{path}: expected a 't,value' header, got {header}")
            ts, vs = [], []
            for row in reader:
                if not row:
                    continue
                ts.append(float(row[0]))
                vs.append(float(row[1]))
        t = np.asarray(ts)
        if len(t) < 2:
            raise InvalidArgumentError(f"{path}: need at least two samples")
        steps = np.diff(t)
        h = float(steps[0])
        if not np.allclose(steps, h, rtol=1e-9, atol=1e-12):
            raise InvalidArgumentError(f"{path}: grid is not uniform; resampling is not performed")
        return cls(t0=float(t[0]), h=h, values=np.asarray(vs))

    def to_json_dict(self) -> dict:
        return {"t0": self.t0, "h": self.h, "values": self.values.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, obj: dict) -> "GridFunction":
        return cls(t0=float(obj["t0"]), h=float(obj["h"]), values=np.asarray(obj["values"], dtype=float))


def _check_combinable(f: GridFunction, g: GridFunction, op: str) -> None:
    if not f.same_grid(g):
        raise InvalidArgumentError(
            f"{op}: grid mismatch (t0 {f.t0} vs {g.t0}, h {f.h} vs {g.h}, "
            f"n {len(f)} vs {len(g)})"
        )
    if np.isnan(f.values).any() or np.isnan(g.values).any():
        raise InvalidArgumentError(f"{op}: inputs carry NaN failure markers")


def convolve(f: GridFunction, g: GridFunction) -> GridFunction:
    """Trapezoid discretization of (f*g)(t) = int_0^t f(t-x) g(x) dx.

    Both inputs are treated as supported on [0, inf).  The result lives on
    the same grid; anything beyond the grid end is discarded, so tabulate
    past the largest evaluation time of interest.
    """
    _check_combinable(f, g, "convolve")
    if f.t0 != 0.0:
        raise InvalidArgumentError("convolve requires grids starting at t0=0")
    a, b = f.values, g.values
    n = len(a)
    if n >= _FFT_THRESHOLD:
        full = fftconvolve(a, b)[:n]
    else:
        full = np.convolve(a, b)[:n]
    # full[k] = sum_i a[k-i] b[i]; trapezoid halves both endpoint products.
    out = f.h * (full - 0.5 * (a * b[0] + a[0] * b))
    out[0] = 0.0
    return GridFunction(t0=f.t0, h=f.h, values=out, notes=f.notes + g.notes)


def cumulative_integral(g: GridFunction) -> GridFunction:
    """Trapezoid antiderivative with value 0 at t0."""
    if np.isnan(g.values).any():
        raise InvalidArgumentError("cumulative_integral: input carries NaN failure markers")
    v = g.values
    out = np.concatenate([[0.0], np.cumsum(0.5 * g.h * (v[1:] + v[:-1]))])
    return g.with_values(out)


def integral(g: GridFunction) -> float:
    """Trapezoid integral over the whole grid."""
    return float(np.trapezoid(g.values, dx=g.h))


def derivative(g: GridFunction) -> GridFunction:
    """Central differences inside, one-sided second-order stencils at the ends."""
    if len(g) < 3:
        raise InvalidArgumentError(f"derivative needs at least 3 samples, got {len(g)}")
    if np.isnan(g.values).any():
        raise InvalidArgumentError("derivative: input carries NaN failure markers")
    v, h = g.values, g.h
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2 * h)
    d[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
    d[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    return g.with_values(d)


def second_derivative(g: GridFunction) -> GridFunction:
    """Second differences inside, one-sided second-order stencils at the ends."""
    if len(g) < 4:
        raise InvalidArgumentError(f"second_derivative needs at least 4 samples, got {len(g)}")
    if np.isnan(g.values).any():
        raise InvalidArgumentError("second_derivative: input carries NaN failure markers")
    v, h = g.values, g.h
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / (h * h)
    d[0] = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / (h * h)
    d[-1] = (2 * v[-1] - 5 * v[-2] + 4 * v[-3] - v[-4]) / (h * h)
    return g.with_values(d)


def convolution_tail_bound(F_at_t1: float, n: int) -> float:
    """Geometric bound F^n / (1 - F) on the dropped tail of the alternating
    convolution-power series, valid for all t <= t1.

    Iterating the product bound for convolutions of distribution functions
    gives F^{k-fold}(t) <= F(t)^k, so the tail past order n is dominated by
    the geometric series starting at F(t1)^{n+1}.
    """
    if not 0.0 <= F_at_t1:
        raise DomainError(f"F(t1) must be >= 0, got {F_at_t1}")
    if F_at_t1 >= 1.0:
        raise DomainError(f"F(t1) must be < 1 for the bound to hold, got {F_at_t1}")
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    return F_at_t1**n / (1.0 - F_at_t1)
