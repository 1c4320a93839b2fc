"""Fixed-step integration schemes for SDE systems.

Two one-step schemes are provided, matched to the two calculi:

    Euler-Maruyama (Ito):
        X_{n+1} = X_n + f(t_n, X_n) dt + g(t_n, X_n) dW_n

    Euler-Heun (Stratonovich):
        Xp      = X_n + f(t_n, X_n) dt + g(t_n, X_n) dW_n
        X_{n+1} = X_n + f(t_n, X_n) dt
                      + (g(t_n, X_n) + g(t_{n+1}, Xp)) / 2 * dW_n

The drift is always advanced by plain Euler; only the diffusion term is
averaged in the Heun corrector.  With state-independent diffusion the two
schemes therefore coincide step by step.

Scheme Auto picks the scheme matching the system's interpretation.
Explicitly requesting the mismatched scheme is refused unless the
configuration sets force_scheme, because the mismatched pairing silently
solves a different equation.

Integrators never clamp states to a region; the clamp policy only decides
whether downstream ensemble statistics record violations (ReportOnly, the
default) or ignore them.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .core import (Array, IntegrationError, Interpretation, SdeSystem,
                   TimeGrid, Trajectory, UsageError, diffusion_batch,
                   drift_batch)
from .wiener import WienerGrid


class Scheme(enum.Enum):
    AUTO = "auto"
    EULER_MARUYAMA = "euler-maruyama"
    EULER_HEUN = "euler-heun"


class ClampPolicy(enum.Enum):
    NONE = "none"
    REPORT_ONLY = "report-only"


@dataclass(frozen=True)
class SimConfig:
    """Grid, start state and scheme selection for one integration run."""

    grid: TimeGrid
    x0: Tuple[float, ...]
    scheme: Scheme = Scheme.AUTO
    seed: int = 0
    clamp_policy: ClampPolicy = ClampPolicy.REPORT_ONLY
    force_scheme: bool = False

    def __post_init__(self):
        x0 = tuple(float(v) for v in np.ravel(np.asarray(self.x0, dtype=float)))
        if not x0:
            raise UsageError("x0 must be non-empty")
        if not all(np.isfinite(x0)):
            raise UsageError("x0 must be finite")
        object.__setattr__(self, "x0", x0)


def resolve_scheme(sys: SdeSystem, cfg: SimConfig) -> Scheme:
    """The concrete scheme for a run, enforcing the interpretation match."""
    natural = (Scheme.EULER_MARUYAMA
               if sys.interpretation is Interpretation.ITO
               else Scheme.EULER_HEUN)
    if cfg.scheme is Scheme.AUTO:
        return natural
    if cfg.scheme is not natural and not cfg.force_scheme:
        raise UsageError(
            f"scheme {cfg.scheme.value} does not match the "
            f"{sys.interpretation.value} interpretation; set "
            "force_scheme=True to insist")
    return cfg.scheme


def integrate_batch(sys: SdeSystem, grid: TimeGrid, x0: Array,
                    scheme: Scheme,
                    increments_for: Callable[[int], Array],
                    on_nonfinite: str = "raise"
                    ) -> Tuple[Array, Array]:
    """March a batch of paths in lockstep over the grid.

    x0 has shape (n_paths, m); increments_for(n) must return the (n_paths,
    r) Wiener increments of step n.  Returns (states, dead_step) where
    states has shape (n_paths, n_steps + 1, m) and dead_step[p] is the
    first step index at which path p produced a non-finite state (-1 if it
    never did).  With on_nonfinite="freeze" a failed path keeps its last
    finite state from there on; with "raise" the first failure aborts.
    """
    if scheme is Scheme.AUTO:
        raise UsageError("integrate_batch needs a concrete scheme")
    x0 = np.asarray(x0, dtype=float)
    n_paths, m = x0.shape
    times = grid.times()
    dt = grid.dt
    states = np.empty((n_paths, grid.n_steps + 1, m))
    states[:, 0] = x0
    dead = np.full(n_paths, -1, dtype=int)
    alive = np.ones(n_paths, dtype=bool)
    x = x0.copy()
    heun = scheme is Scheme.EULER_HEUN
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for n in range(grid.n_steps):
            t = times[n]
            f = drift_batch(sys, t, x)
            euler = x + f * dt
            dw = increments_for(n)
            g0 = diffusion_batch(sys, t, x)
            if heun:
                pred = euler + np.einsum("pmr,pr->pm", g0, dw)
                g1 = diffusion_batch(sys, times[n + 1], pred)
                gbar = 0.5 * (g0 + g1)
                x_new = euler + np.einsum("pmr,pr->pm", gbar, dw)
            else:
                x_new = euler + np.einsum("pmr,pr->pm", g0, dw)
            bad = ~np.isfinite(x_new).all(axis=1) & alive
            if bad.any():
                if on_nonfinite == "raise":
                    p = int(np.flatnonzero(bad)[0])
                    raise IntegrationError(
                        f"state became non-finite at step {n + 1} "
                        f"(t={times[n + 1]:.6g})",
                        step=n + 1, t=float(times[n + 1]), last_state=x[p])
                dead[bad] = n + 1
                alive &= ~bad
            x_new[~alive] = x[~alive]
            x = x_new
            states[:, n + 1] = x
    return states, dead


def _single_path_increments(noise: WienerGrid) -> Callable[[int], Array]:
    increments = noise.increments

    def for_step(n: int) -> Array:
        return increments[n][None, :]

    return for_step


def simulate(sys: SdeSystem, cfg: SimConfig, noise: WienerGrid) -> Trajectory:
    """Integrate one path driven by an explicit Wiener grid.

    The noise must live on the configured time grid and carry sys.r
    components.  Non-finite states abort with IntegrationError (step index
    and last finite state attached).
    """
    if len(cfg.x0) != sys.m:
        raise UsageError(f"x0 has length {len(cfg.x0)}, system needs {sys.m}")
    if noise.grid != cfg.grid:
        raise UsageError("noise grid differs from the configured grid")
    if noise.r != sys.r:
        raise UsageError(
            f"noise has {noise.r} components, system needs {sys.r}")
    scheme = resolve_scheme(sys, cfg)
    x0 = np.asarray(cfg.x0)[None, :]
    states, _ = integrate_batch(sys, cfg.grid, x0, scheme,
                                _single_path_increments(noise),
                                on_nonfinite="raise")
    return Trajectory(cfg.grid, states[0], path_id=noise.path_id)


def simulate_deterministic(sys: SdeSystem, cfg: SimConfig) -> Trajectory:
    """Integrate the drift alone (g treated as zero) by forward Euler."""
    if len(cfg.x0) != sys.m:
        raise UsageError(f"x0 has length {len(cfg.x0)}, system needs {sys.m}")
    grid = cfg.grid
    times = grid.times()
    dt = grid.dt
    x = np.asarray(cfg.x0, dtype=float)[None, :]
    states = np.empty((grid.n_steps + 1, sys.m))
    states[0] = x[0]
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for n in range(grid.n_steps):
            x = x + drift_batch(sys, times[n], x) * dt
            if not np.isfinite(x).all():
                raise IntegrationError(
                    f"state became non-finite at step {n + 1} "
                    f"(t={times[n + 1]:.6g})",
                    step=n + 1, t=float(times[n + 1]),
                    last_state=states[n])
            states[n + 1] = x[0]
    return Trajectory(grid, states, path_id=0)


def write_trajectory_csv(traj: Trajectory, target,
                         coord_names: Optional[Sequence[str]] = None) -> None:
    """Write a trajectory as CSV: header t,x_1,...,x_m, one row per time.

    Floats are written with round-trip precision (repr), so parsing the
    file recovers the exact values.  target is a path or a text file
    object.
    """
    names = (tuple(coord_names) if coord_names is not None
             else tuple(f"x_{i + 1}" for i in range(traj.m)))
    if len(names) != traj.m:
        raise UsageError("coord_names length must match the trajectory")
    own = isinstance(target, (str, bytes)) or hasattr(target, "__fspath__")
    fh = open(target, "w", newline="") if own else target
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t"] + list(names))
        for t, row in zip(traj.t, traj.states):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])
    finally:
        if own:
            fh.close()


def trajectory_csv_text(traj: Trajectory,
                        coord_names: Optional[Sequence[str]] = None) -> str:
    buf = io.StringIO()
    write_trajectory_csv(traj, buf, coord_names)
    return buf.getvalue()
