"""Core data model for systems of stochastic differential equations.

A system is written in differential form as

    dX(t) = f(t, X(t)) dt + g(t, X(t)) dW(t),

where the state X lives in R^m, W is an r-dimensional Wiener process with
independent components, f maps (t, x) to a drift vector in R^m and g maps
(t, x) to an m-by-r diffusion matrix.  The same pair (f, g) can be read
either in the Ito or in the Stratonovich sense; the interpretation tag on
:class:`SdeSystem` records which one is meant.

Both fields are treated as black boxes: they only need to be evaluable at
a point.  Evaluations must be deterministic functions of (t, x) with no
hidden state; everything downstream (checking, integration, ensemble
statistics) relies on that contract for reproducibility.

Regions come in two flavours: :class:`Box` describes per-coordinate bounds
(possibly one-sided), :class:`Polyhedron` an intersection of half-spaces.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

Array = np.ndarray
DriftField = Callable[[float, Array], Array]
DiffusionField = Callable[[float, Array], Array]
JacobianField = Callable[[float, Array], Array]


class UsageError(ValueError):
    """Raised for malformed arguments or inconsistent configuration."""


class ModelEvaluationError(RuntimeError):
    """Raised when a drift/diffusion callable returns a non-finite value.

    Carries the evaluation point and the offending output index so the
    failure can be located without re-running the model.
    """

    def __init__(self, message: str, *, t: float | None = None,
                 x: Sequence[float] | None = None, index=None):
        super().__init__(message)
        self.t = t
        self.x = None if x is None else tuple(float(v) for v in np.ravel(x))
        self.index = index


class IntegrationError(RuntimeError):
    """Raised when a trajectory leaves the representable range mid-run."""

    def __init__(self, message: str, *, step: int, t: float,
                 last_state: Sequence[float]):
        super().__init__(message)
        self.step = step
        self.t = t
        self.last_state = tuple(float(v) for v in np.ravel(last_state))


class Interpretation(enum.Enum):
    """Which stochastic calculus the pair (f, g) is written in."""

    ITO = "ito"
    STRATONOVICH = "stratonovich"


@dataclass(frozen=True)
class SdeSystem:
    """A system dX = f dt + g dW with black-box drift and diffusion.

    Args:
        m: state dimension (>= 1).
        r: number of independent Wiener components (>= 0).
        drift: callable (t, x) -> array of shape (m,).
        diffusion: callable (t, x) -> array of shape (m, r).
        interpretation: Ito or Stratonovich reading of (f, g).
        name: label used in reports and file output.
        vectorized: if True, drift/diffusion also accept a batch of states
            of shape (n, m) and return (n, m) / (n, m, r), operating on each
            row independently.  Purely an evaluation speedup; results must
            be row-wise identical to single-state calls.
        diffusion_jacobian: optional callable (t, x) -> array of shape
            (m, r, m) with entry [i, k, j] = d g[i, k] / d x[j].  Used by the
            analytic mode of the drift-correction machinery.
        coord_names: optional labels for the state coordinates (CSV headers,
            plots).  Defaults to x_1 .. x_m.
        coord_ranges: optional per-coordinate plausibility intervals used by
            the checkers when a coordinate is not pinned by the region under
            test.
    """

    m: int
    r: int
    drift: DriftField
    diffusion: DiffusionField
    interpretation: Interpretation = Interpretation.ITO
    name: str = "sde"
    vectorized: bool = False
    diffusion_jacobian: Optional[JacobianField] = None
    coord_names: Optional[Tuple[str, ...]] = None
    coord_ranges: Optional[Tuple[Tuple[float, float], ...]] = None

    def __post_init__(self):
        if self.m < 1:
            raise UsageError("state dimension m must be >= 1")
        if self.r < 0:
            raise UsageError("noise dimension r must be >= 0")
        if self.coord_names is not None:
            names = tuple(str(s) for s in self.coord_names)
            if len(names) != self.m:
                raise UsageError("coord_names length must equal m")
            object.__setattr__(self, "coord_names", names)
        if self.coord_ranges is not None:
            ranges = tuple((float(lo), float(hi)) for lo, hi in self.coord_ranges)
            if len(ranges) != self.m:
                raise UsageError("coord_ranges length must equal m")
            for lo, hi in ranges:
                if not lo < hi:
                    raise UsageError("coord_ranges entries need lo < hi")
            object.__setattr__(self, "coord_ranges", ranges)

    def labels(self) -> Tuple[str, ...]:
        if self.coord_names is not None:
            return self.coord_names
        return tuple(f"x_{i + 1}" for i in range(self.m))


def eval_drift(sys: SdeSystem, t: float, x) -> Array:
    """Evaluate f(t, x) with shape and finiteness checks.

    Raises:
        UsageError: x has the wrong length, t < 0, or the drift returned
            the wrong shape.
        ModelEvaluationError: the drift returned a non-finite entry.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.m,):
        raise UsageError(f"state must have shape ({sys.m},), got {x.shape}")
    if t < 0:
        raise UsageError("time must be >= 0")
    out = np.asarray(sys.drift(t, x), dtype=float)
    if out.shape != (sys.m,):
        raise UsageError(
            f"drift returned shape {out.shape}, expected ({sys.m},)")
    bad = np.flatnonzero(~np.isfinite(out))
    if bad.size:
        i = int(bad[0])
        raise ModelEvaluationError(
            f"drift component {i} is not finite at t={t}", t=t, x=x, index=i)
    return out


def eval_diffusion(sys: SdeSystem, t: float, x) -> Array:
    """Evaluate g(t, x) with shape and finiteness checks.

    Same error contract as :func:`eval_drift`; the index attached to a
    non-finite entry is the (row, column) pair.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.m,):
        raise UsageError(f"state must have shape ({sys.m},), got {x.shape}")
    if t < 0:
        raise UsageError("time must be >= 0")
    out = np.asarray(sys.diffusion(t, x), dtype=float)
    if out.shape != (sys.m, sys.r):
        raise UsageError(
            f"diffusion returned shape {out.shape}, expected ({sys.m}, {sys.r})")
    if not np.all(np.isfinite(out)):
        i, k = (int(v) for v in np.argwhere(~np.isfinite(out))[0])
        raise ModelEvaluationError(
            f"diffusion entry ({i}, {k}) is not finite at t={t}",
            t=t, x=x, index=(i, k))
    return out


def drift_batch(sys: SdeSystem, t: float, states: Array) -> Array:
    """Evaluate the drift on a (n, m) batch of states, shape (n, m).

    Uses the system's vectorized path when available, otherwise loops.
    No finiteness check; callers decide how to treat bad values.
    """
    states = np.asarray(states, dtype=float)
    if sys.vectorized:
        out = np.asarray(sys.drift(t, states), dtype=float)
        if out.shape != states.shape:
            raise UsageError(
                f"vectorized drift returned shape {out.shape}, "
                f"expected {states.shape}")
        return out
    out = np.empty_like(states)
    for k in range(states.shape[0]):
        out[k] = sys.drift(t, states[k])
    return out


def diffusion_batch(sys: SdeSystem, t: float, states: Array) -> Array:
    """Evaluate the diffusion on a (n, m) batch, shape (n, m, r)."""
    states = np.asarray(states, dtype=float)
    n = states.shape[0]
    if sys.vectorized:
        out = np.asarray(sys.diffusion(t, states), dtype=float)
        if out.shape != (n, sys.m, sys.r):
            raise UsageError(
                f"vectorized diffusion returned shape {out.shape}, "
                f"expected {(n, sys.m, sys.r)}")
        return out
    out = np.empty((n, sys.m, sys.r), dtype=float)
    for k in range(n):
        out[k] = sys.diffusion(t, states[k])
    return out


def jacobian_batch(sys: SdeSystem, t: float, states: Array) -> Array:
    """Evaluate the analytic diffusion Jacobian on a batch, (n, m, r, m)."""
    if sys.diffusion_jacobian is None:
        raise UsageError(
            f"system {sys.name!r} does not provide an analytic diffusion "
            "jacobian")
    states = np.asarray(states, dtype=float)
    n = states.shape[0]
    if sys.vectorized:
        out = np.asarray(sys.diffusion_jacobian(t, states), dtype=float)
        if out.shape != (n, sys.m, sys.r, sys.m):
            raise UsageError(
                f"vectorized diffusion jacobian returned shape {out.shape}, "
                f"expected {(n, sys.m, sys.r, sys.m)}")
        return out
    out = np.empty((n, sys.m, sys.r, sys.m), dtype=float)
    for k in range(n):
        out[k] = sys.diffusion_jacobian(t, states[k])
    return out


@dataclass(frozen=True)
class Box:
    """Per-coordinate bounds a_i <= x_i <= b_i on a subset of coordinates.

    ``indices`` are 0-based coordinate positions.  A bound may be infinite
    on one side (half-line constraint); a coordinate constrained on neither
    side is rejected because it adds nothing.
    """

    indices: Tuple[int, ...]
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if not idx:
            raise UsageError("box must constrain at least one coordinate")
        if len(set(idx)) != len(idx):
            raise UsageError("box indices must be distinct")
        if any(i < 0 for i in idx):
            raise UsageError("box indices must be >= 0")
        if len(lo) != len(idx) or len(hi) != len(idx):
            raise UsageError("box bounds must match the number of indices")
        for i, a, b in zip(idx, lo, hi):
            if math.isnan(a) or math.isnan(b):
                raise UsageError("box bounds must not be NaN")
            if not a < b:
                raise UsageError(
                    f"box needs lower < upper on coordinate {i}: {a} !< {b}")
            if math.isinf(a) and math.isinf(b):
                raise UsageError(
                    f"coordinate {i} is unbounded on both sides; drop it")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def unit(cls, indices: Sequence[int]) -> "Box":
        """The unit box [0, 1] on each of the given coordinates."""
        n = len(tuple(indices))
        return cls(tuple(indices), (0.0,) * n, (1.0,) * n)

    @classmethod
    def positive(cls, indices: Sequence[int]) -> "Box":
        """The cone x_i >= 0 on each of the given coordinates."""
        n = len(tuple(indices))
        return cls(tuple(indices), (0.0,) * n, (math.inf,) * n)

    def bound(self, coord: int) -> Tuple[float, float]:
        """Bounds for a coordinate; (-inf, inf) when unconstrained."""
        for i, a, b in zip(self.indices, self.lower, self.upper):
            if i == coord:
                return (a, b)
        return (-math.inf, math.inf)

    def faces(self) -> Tuple[Tuple[int, str, float], ...]:
        """Finite faces as (coordinate, side, pinned value) triples.

        Ordered by coordinate, lower before upper; infinite bounds
        contribute no face.
        """
        out = []
        for i, a, b in sorted(zip(self.indices, self.lower, self.upper)):
            if math.isfinite(a):
                out.append((i, "lower", a))
            if math.isfinite(b):
                out.append((i, "upper", b))
        return tuple(out)

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        for i, a, b in zip(self.indices, self.lower, self.upper):
            if x[i] < a - tol or x[i] > b + tol:
                return False
        return True

    def as_polyhedron(self, m: int) -> "Polyhedron":
        """The same region as an intersection of half-spaces in R^m."""
        if max(self.indices) >= m:
            raise UsageError("box indices exceed the requested dimension")
        halves = []
        for i, a, b in zip(self.indices, self.lower, self.upper):
            if math.isfinite(a):
                anchor = np.zeros(m)
                anchor[i] = a
                normal = np.zeros(m)
                normal[i] = 1.0
                halves.append(Halfspace(tuple(anchor), tuple(normal)))
            if math.isfinite(b):
                anchor = np.zeros(m)
                anchor[i] = b
                normal = np.zeros(m)
                normal[i] = -1.0
                halves.append(Halfspace(tuple(anchor), tuple(normal)))
        return Polyhedron(tuple(halves))


@dataclass(frozen=True)
class Halfspace:
    """The set {x : <x - anchor, normal> >= 0} with inward normal."""

    anchor: Tuple[float, ...]
    normal: Tuple[float, ...]

    def __post_init__(self):
        a = tuple(float(v) for v in self.anchor)
        n = tuple(float(v) for v in self.normal)
        if len(a) != len(n):
            raise UsageError("halfspace anchor and normal lengths differ")
        if not all(math.isfinite(v) for v in a + n):
            raise UsageError("halfspace anchor and normal must be finite")
        if math.sqrt(sum(v * v for v in n)) == 0.0:
            raise UsageError("halfspace normal must be nonzero")
        object.__setattr__(self, "anchor", a)
        object.__setattr__(self, "normal", n)


@dataclass(frozen=True)
class Polyhedron:
    """An intersection of half-spaces; empty list means all of R^m."""

    halfspaces: Tuple[Halfspace, ...]

    def __post_init__(self):
        halves = tuple(self.halfspaces)
        dims = {len(h.normal) for h in halves}
        if len(dims) > 1:
            raise UsageError("halfspaces live in different dimensions")
        object.__setattr__(self, "halfspaces", halves)

    @property
    def dim(self) -> Optional[int]:
        if not self.halfspaces:
            return None
        return len(self.halfspaces[0].normal)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_0 < t_1 < ... < t_n over [t0, t_end]."""

    t0: float
    t_end: float
    n_steps: int

    def __post_init__(self):
        if not math.isfinite(self.t0) or not math.isfinite(self.t_end):
            raise UsageError("grid endpoints must be finite")
        if self.t0 < 0:
            raise UsageError("grid start must be >= 0")
        if not self.t_end > self.t0:
            raise UsageError("grid needs t_end > t0")
        if self.n_steps < 1:
            raise UsageError("grid needs at least one step")

    @property
    def dt(self) -> float:
        return (self.t_end - self.t0) / self.n_steps

    def times(self) -> Array:
        return np.linspace(self.t0, self.t_end, self.n_steps + 1)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One sampled path: states[k] is the state at grid time t_k."""

    grid: TimeGrid
    states: Array
    path_id: int = 0

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        if states.ndim != 2 or states.shape[0] != self.grid.n_steps + 1:
            raise UsageError(
                f"states must have shape (n_steps + 1, m), got {states.shape}")
        states = states.copy()
        states.setflags(write=False)
        object.__setattr__(self, "states", states)

    @property
    def m(self) -> int:
        return self.states.shape[1]

    @property
    def t(self) -> Array:
        return self.grid.times()

    @property
    def x0(self) -> Array:
        return self.states[0]

    @property
    def end(self) -> Array:
        return self.states[-1]


@dataclass(frozen=True, eq=False)
class ModelInfo:
    """Bundled defaults for a named model: region, start state, horizon."""

    box: Optional[Box]
    x0: Array
    horizon: float

    def __post_init__(self):
        x0 = np.asarray(self.x0, dtype=float).copy()
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)
        if not self.horizon > 0:
            raise UsageError("model horizon must be positive")
