"""Trajectory-level Monte Carlo for the switch process and its stationary
counterpart.

These simulators are the brute-force oracle for every analytic result in the
package.  Determinism contract: a path is a pure function of its seed, and
estimators derive per-path streams from (seed, path_index), so results do
not depend on how paths are scheduled across workers.  The reductions are
integer counts (the processes are +/-1 valued), which makes them exactly
order-insensitive.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distributions import SwitchingDistribution, make_rng, path_rng
from .errors import InvalidArgumentError
from .grid import GridFunction, GridSpec


@dataclass(frozen=True)
class SwitchTrajectory:
    """Switch epochs of one realization plus the starting sign.

    The last epoch may exceed the horizon (the draw that crossed it is
    kept); evaluation clips at the horizon implicitly since callers only ask
    for t <= horizon.
    """

    epochs: np.ndarray
    initial_sign: int = 1
    horizon: float = math.inf

    def __post_init__(self):
        ep = np.asarray(self.epochs, dtype=float)
        if ep.ndim != 1:
            raise InvalidArgumentError("epochs must be a 1-d array")
        if len(ep) > 1 and not np.all(np.diff(ep) > 0):
            raise InvalidArgumentError("epochs must be strictly increasing")
        if len(ep) and ep[0] <= 0:
            raise InvalidArgumentError("epochs must be positive")
        ep.setflags(write=False)
        object.__setattr__(self, "epochs", ep)
        if self.initial_sign not in (-1, 1):
            raise InvalidArgumentError("initial_sign must be +1 or -1")

    def count(self, t) -> np.ndarray:
        """Number of switches up to and including time t."""
        return np.searchsorted(self.epochs, t, side="right")

    def value(self, t) -> np.ndarray:
        """Process value: initial_sign * (-1)^count(t)."""
        return self.initial_sign * (1 - 2 * (self.count(t) & 1))

    def step_points(self, t_end: float | None = None):
        """(x, y) polyline of the piecewise-constant path, for plotting."""
        end = self.horizon if t_end is None else t_end
        ep = self.epochs[self.epochs <= end]
        xs = [0.0]
        ys = [float(self.initial_sign)]
        sign = self.initial_sign
        for e in ep:
            xs.extend([e, e])
            ys.append(float(sign))
            sign = -sign
            ys.append(float(sign))
        xs.append(float(end))
        ys.append(float(sign))
        return np.asarray(xs), np.asarray(ys)


@dataclass(frozen=True)
class StationaryInitial:
    """Straddling-interval split (forward delay a, backward delay b) and sign."""

    a: float
    b: float
    delta: int

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise InvalidArgumentError("delays must be non-negative")
        if self.delta not in (-1, 1):
            raise InvalidArgumentError("delta must be +1 or -1")


def _draw_epochs(dist: SwitchingDistribution, horizon: float, rng) -> np.ndarray:
    """Inter-arrival sums until the partial sum first exceeds the horizon."""
    block = max(8, int(horizon / dist.mean * 1.5) + 1)
    total = 0.0
    chunks = []
    while total <= horizon:
        draws = np.atleast_1d(dist.sample(rng, block))
        cum = total + np.cumsum(draws)
        chunks.append(cum)
        total = float(cum[-1])
    epochs = np.concatenate(chunks)
    keep = int(np.searchsorted(epochs, horizon, side="right"))
    return epochs[: keep + 1]  # keep the first epoch past the horizon


def simulate_switch(dist: SwitchingDistribution, horizon: float, seed) -> SwitchTrajectory:
    """One switch-process path on [0, horizon], starting at +1."""
    if not horizon > 0:
        raise InvalidArgumentError(f"horizon must be positive, got {horizon}")
    rng = make_rng(seed)
    return SwitchTrajectory(epochs=_draw_epochs(dist, horizon, rng),
                            initial_sign=1, horizon=horizon)


def _draw_stationary_start(dist: SwitchingDistribution, rng):
    """(length-biased interval, forward delay a, backward delay b, delta).

    The straddling interval has the length-biased density t f(t)/mean and is
    split uniformly, which realizes the joint delay density f(a+b)/mean.
    Draw order is fixed: interval, split, sign.
    """
    length = float(dist.sample_size_biased(rng))
    u = float(rng.random())
    a = u * length
    b = length - a
    delta = 1 if rng.random() < 0.5 else -1
    return length, a, b, delta


def simulate_stationary(dist: SwitchingDistribution, horizon: float, seed):
    """One stationary-switch realization on [-horizon, horizon].

    Returns (initial, forward, backward): the delay/sign draw plus two
    independent switch paths.  Evaluate the process with
    :func:`evaluate_stationary`; on (-b, a) it sits at -delta, at a it hands
    over to the forward path, at -b to the (time-reversed) backward path.
    """
    if not horizon > 0:
        raise InvalidArgumentError(f"horizon must be positive, got {horizon}")
    if not math.isfinite(dist.mean):
        raise InvalidArgumentError("stationary construction needs a finite mean")
    rng = make_rng(seed)
    _, a, b, delta = _draw_stationary_start(dist, rng)
    forward = SwitchTrajectory(
        epochs=_draw_epochs(dist, max(horizon - a, dist.mean), rng),
        initial_sign=1, horizon=max(horizon - a, dist.mean),
    )
    backward = SwitchTrajectory(
        epochs=_draw_epochs(dist, max(horizon - b, dist.mean), rng),
        initial_sign=1, horizon=max(horizon - b, dist.mean),
    )
    return StationaryInitial(a=a, b=b, delta=delta), forward, backward


def evaluate_stationary(initial: StationaryInitial, forward: SwitchTrajectory,
                        backward: SwitchTrajectory, t) -> np.ndarray:
    """Value of the stationary switch process at times t (scalar or array)."""
    t = np.asarray(t, dtype=float)
    d = initial.delta
    out = np.full(t.shape, -d, dtype=np.int64)
    fwd = t >= initial.a
    out[fwd] = d * forward.value(t[fwd] - initial.a)
    bwd = t <= -initial.b
    out[bwd] = -d * backward.value(-(t[bwd] + initial.b))
    return out


def _mean_and_stderr(plus_counts: np.ndarray, n_paths: int):
    mean = 2.0 * plus_counts / n_paths - 1.0
    var = np.maximum(1.0 - mean * mean, 0.0)
    stderr = np.sqrt(var / (n_paths - 1)) if n_paths > 1 else np.zeros_like(mean)
    return mean, stderr


def _chunked_counts(worker, n_paths: int, n_out: int, workers: int) -> np.ndarray:
    """Accumulate integer counts over path chunks; the sum is order-exact, so
    the result is independent of worker count and scheduling."""
    if workers <= 1:
        return worker(range(n_paths))
    chunk = (n_paths + workers - 1) // workers
    ranges = [range(lo, min(lo + chunk, n_paths)) for lo in range(0, n_paths, chunk)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(worker, ranges))
    return np.sum(parts, axis=0)


def estimate_expected_value(dist: SwitchingDistribution, grid: GridSpec,
                            n_paths: int, seed, workers: int = 1):
    """Pointwise Monte Carlo mean of the switch process with standard errors.

    Returns (mean, stderr) as GridFunctions.  Each path uses the stream
    derived from (seed, path_index).
    """
    if n_paths < 100:
        raise InvalidArgumentError(f"need at least 100 paths, got {n_paths}")
    t = grid.times()
    horizon = float(t[-1]) if t[-1] > 0 else grid.h

    def worker(indices) -> np.ndarray:
        counts = np.zeros(len(t), dtype=np.int64)
        for i in indices:
            rng = path_rng(seed, i)
            ep = _draw_epochs(dist, horizon, rng)
            counts += (np.searchsorted(ep, t, side="right") & 1) == 0
        return counts

    plus = _chunked_counts(worker, n_paths, len(t), workers)
    mean, stderr = _mean_and_stderr(plus, n_paths)
    return (GridFunction(t0=grid.t0, h=grid.h, values=mean),
            GridFunction(t0=grid.t0, h=grid.h, values=stderr))


def estimate_covariance(dist: SwitchingDistribution, grid: GridSpec,
                        n_paths: int, seed, workers: int = 1):
    """Monte Carlo mean of Y(t) Y(0) over stationary paths, with stderr.

    Only the forward construction matters for t >= 0: the product is +1
    until the first switch at the forward delay, then follows the embedded
    switch path with its sign flipped; the symmetric sign cancels.
    """
    if n_paths < 100:
        raise InvalidArgumentError(f"need at least 100 paths, got {n_paths}")
    if grid.t0 != 0.0:
        raise InvalidArgumentError("covariance estimation needs a grid starting at 0")
    t = grid.times()
    t_end = float(t[-1]) if t[-1] > 0 else grid.h

    def worker(indices) -> np.ndarray:
        counts = np.zeros(len(t), dtype=np.int64)
        for i in indices:
            rng = path_rng(seed, i)
            _, a, _, _ = _draw_stationary_start(dist, rng)
            if a > t_end:
                counts += 1
                continue
            ep = _draw_epochs(dist, t_end - a if t_end > a else dist.mean, rng)
            after = t >= a
            prod = np.ones(len(t), dtype=np.int64)
            parity = np.searchsorted(ep, t[after] - a, side="right") & 1
            if a > 0:
                # Y(0) = -delta, Y(t) = delta * X(t - a): product flips with X.
                prod[after] = 2 * parity - 1
            else:
                # zero forward delay: Y(0) already sits on the forward path
                prod[after] = 1 - 2 * parity
            counts += prod == 1
        return counts

    plus = _chunked_counts(worker, n_paths, len(t), workers)
    mean, stderr = _mean_and_stderr(plus, n_paths)
    return (GridFunction(t0=grid.t0, h=grid.h, values=mean),
            GridFunction(t0=grid.t0, h=grid.h, values=stderr))
