"""Switching a system between its Ito and Stratonovich forms.

The two calculi describe the same family of models through shifted drifts.
With the correction vector

    h_i(t, x) = sum_k sum_j  d g[i, k] / d x[j]  *  g[j, k],

a Stratonovich pair (f, g) describes the same solutions as the Ito pair
(f + h/2, g), and conversely an Ito pair (f, g) matches the Stratonovich
pair (f - h/2, g).  The diffusion matrix never changes; only the drift
absorbs the correction.

The Jacobian d g / d x comes either from an analytic callable shipped on
the system or from scaled central differences of the diffusion field.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .core import (Array, Interpretation, ModelEvaluationError, SdeSystem,
                   UsageError, diffusion_batch, jacobian_batch)


class JacobianMode(enum.Enum):
    ANALYTIC = "analytic"
    CENTRAL_DIFFERENCE = "central-difference"


@dataclass(frozen=True)
class JacobianPolicy:
    """How to obtain d g / d x for the drift correction.

    Central differences use the step fd_step * max(1, |x_j|) in
    coordinate j; analytic mode requires the system to carry a
    diffusion_jacobian callable.
    """

    mode: JacobianMode = JacobianMode.CENTRAL_DIFFERENCE
    fd_step: float = 1e-6

    def __post_init__(self):
        if not self.fd_step > 0:
            raise UsageError("fd_step must be positive")


def _fd_jacobian_batch(sys: SdeSystem, t: float, states: Array,
                       fd_step: float) -> Array:
    """Central-difference d g / d x on a (n, m) batch, (n, m, r, m)."""
    n = states.shape[0]
    out = np.empty((n, sys.m, sys.r, sys.m))
    for j in range(sys.m):
        delta = fd_step * np.maximum(1.0, np.abs(states[:, j]))
        plus = states.copy()
        minus = states.copy()
        plus[:, j] += delta
        minus[:, j] -= delta
        gp = diffusion_batch(sys, t, plus)
        gm = diffusion_batch(sys, t, minus)
        out[:, :, :, j] = (gp - gm) / (2.0 * delta)[:, None, None]
    return out


def correction_batch(sys: SdeSystem, t: float, states: Array,
                     policy: JacobianPolicy) -> Array:
    """The correction vector h on a (n, m) batch of states, (n, m)."""
    states = np.asarray(states, dtype=float)
    if policy.mode is JacobianMode.ANALYTIC:
        jac = jacobian_batch(sys, t, states)
    else:
        jac = _fd_jacobian_batch(sys, t, states, policy.fd_step)
    if not np.all(np.isfinite(jac)):
        b, i, k, j = (int(v) for v in np.argwhere(~np.isfinite(jac))[0])
        raise ModelEvaluationError(
            f"diffusion jacobian entry ({i}, {k}, {j}) is not finite "
            f"at t={t}", t=t, x=states[b], index=(i, k, j))
    g = diffusion_batch(sys, t, states)
    # h_i = sum_{k,j} J[i, k, j] * g[j, k]
    return np.einsum("nikj,njk->ni", jac, g)


def correction(sys: SdeSystem, t: float, x,
               policy: JacobianPolicy = JacobianPolicy()) -> Array:
    """The correction vector h(t, x), shape (m,).

    Raises ModelEvaluationError with the offending (i, k, j) index when a
    Jacobian entry comes out non-finite.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.m,):
        raise UsageError(f"state must have shape ({sys.m},), got {x.shape}")
    return correction_batch(sys, t, x[None, :], policy)[0]


def _shifted_drift(sys: SdeSystem, policy: JacobianPolicy, sign: float):
    base = sys.drift

    def drift(t: float, x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            h = correction_batch(sys, t, x[None, :], policy)[0]
        else:
            h = correction_batch(sys, t, x, policy)
        return np.asarray(base(t, x), dtype=float) + sign * 0.5 * h

    drift.__name__ = f"{'plus' if sign > 0 else 'minus'}_half_correction"
    return drift


def stratonovich_to_ito(sys: SdeSystem,
                        policy: JacobianPolicy = JacobianPolicy()
                        ) -> SdeSystem:
    """Rewrite a Stratonovich system as the equivalent Ito system.

    The returned system has drift f + h/2, the same diffusion, and the
    Ito tag.  Requires a smooth diffusion (the correction differentiates
    it) and a system tagged Stratonovich.
    """
    if sys.interpretation is not Interpretation.STRATONOVICH:
        raise UsageError("stratonovich_to_ito expects a Stratonovich system")
    return replace(sys, drift=_shifted_drift(sys, policy, +1.0),
                   interpretation=Interpretation.ITO,
                   name=f"{sys.name}-as-ito")


def ito_to_stratonovich(sys: SdeSystem,
                        policy: JacobianPolicy = JacobianPolicy()
                        ) -> SdeSystem:
    """Rewrite an Ito system as the equivalent Stratonovich system."""
    if sys.interpretation is not Interpretation.ITO:
        raise UsageError("ito_to_stratonovich expects an Ito system")
    return replace(sys, drift=_shifted_drift(sys, policy, -1.0),
                   interpretation=Interpretation.STRATONOVICH,
                   name=f"{sys.name}-as-stratonovich")
