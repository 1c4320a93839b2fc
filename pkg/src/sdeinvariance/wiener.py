"""Reproducible driving noise for the integrators.

Every normal increment is addressed by the tuple (seed, path_id, step,
component) and computed as a pure function of that tuple, so regeneration
is bit-identical no matter how paths are batched, chunked across workers,
or revisited later.  Distinct path ids therefore get disjoint streams by
construction.

The mapping is a chained 64-bit hash: each tuple element is folded in with
an xor and passed through the splitmix64 finalizer (a bijective mixer with
good avalanche behaviour).  The final 64-bit word is turned into a uniform
in the open interval (0, 1) using its top 53 bits, and the increment is

    dW = sqrt(dt) * ndtri(u)

with ndtri the inverse of the standard normal CDF (scipy.special).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .core import Array, TimeGrid, UsageError

_MASK = (1 << 64) - 1
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MULT1 = np.uint64(0xBF58476D1CE4E5B9)
_MULT2 = np.uint64(0x94D049BB133111EB)


def _mix64(z: Array) -> Array:
    # splitmix64 finalizer; uint64 arithmetic wraps mod 2^64 by design
    with np.errstate(over="ignore"):
        z = z ^ (z >> np.uint64(30))
        z = z * _MULT1
        z = z ^ (z >> np.uint64(27))
        z = z * _MULT2
        z = z ^ (z >> np.uint64(31))
    return z


def _as_u64(value) -> Array:
    return np.asarray(value, dtype=np.uint64)


def uniform_stream(seed: int, path_ids, steps, components) -> Array:
    """Uniforms in (0, 1) for broadcastable index arrays.

    The three index arguments broadcast against each other; the result has
    the broadcast shape.  Each output element depends only on the tuple
    (seed, path_id, step, component).
    """
    with np.errstate(over="ignore"):
        h = _mix64(_as_u64(int(seed) & _MASK) + _GAMMA)
    h = _mix64(h ^ _as_u64(path_ids))
    h = _mix64(h ^ _as_u64(steps))
    h = _mix64(h ^ _as_u64(components))
    top53 = (h >> np.uint64(11)).astype(np.float64)
    return (top53 + 0.5) * 2.0 ** -53


def normal_stream(seed: int, path_ids, steps, components) -> Array:
    """Standard normal draws addressed like :func:`uniform_stream`."""
    return ndtri(uniform_stream(seed, path_ids, steps, components))


def increments_for_step(seed: int, path_ids: Array, step: int, r: int,
                        dt: float) -> Array:
    """Wiener increments over one step for many paths, shape (n_paths, r)."""
    ids = np.asarray(path_ids, dtype=np.uint64).reshape(-1, 1)
    comps = np.arange(r, dtype=np.uint64).reshape(1, -1)
    z = normal_stream(seed, ids, np.uint64(step), comps)
    return z * np.sqrt(dt)


@dataclass(frozen=True, eq=False)
class WienerGrid:
    """Wiener increments for one path on one time grid.

    increments[n, k] is the k-th component increment over [t_n, t_{n+1}].
    Two instances built with the same (seed, path_id, grid, r) hold
    bit-identical arrays.
    """

    seed: int
    path_id: int
    grid: TimeGrid
    increments: Array

    def __post_init__(self):
        arr = np.asarray(self.increments, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != self.grid.n_steps:
            raise UsageError(
                f"increments must have shape (n_steps, r), got {arr.shape}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "increments", arr)

    @property
    def r(self) -> int:
        return self.increments.shape[1]

    @classmethod
    def generate(cls, seed: int, path_id: int, grid: TimeGrid,
                 r: int) -> "WienerGrid":
        if path_id < 0:
            raise UsageError("path_id must be >= 0")
        if r < 0:
            raise UsageError("noise dimension r must be >= 0")
        steps = np.arange(grid.n_steps, dtype=np.uint64).reshape(-1, 1)
        comps = np.arange(r, dtype=np.uint64).reshape(1, -1)
        z = normal_stream(seed, np.uint64(int(path_id)), steps, comps)
        return cls(seed=int(seed), path_id=int(path_id), grid=grid,
                   increments=z * np.sqrt(grid.dt))

    def path(self) -> Array:
        """Sampled Wiener path W at the grid times, shape (n_steps + 1, r)."""
        out = np.zeros((self.grid.n_steps + 1, self.increments.shape[1]))
        np.cumsum(self.increments, axis=0, out=out[1:])
        return out
