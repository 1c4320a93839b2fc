"""Sampling-based invariance checks for boxes, cones and polyhedra.

A region stays invariant under dX = f dt + g dW exactly when, everywhere
on its boundary and at all times, the drift does not point outward and
every column of the diffusion matrix is tangential:

    box face {x_i = a_i}:   f_i >= 0   and   g[i, j] = 0 for all j,
    box face {x_i = b_i}:   f_i <= 0   and   g[i, j] = 0 for all j,
    half-space face:        <f, n> >= 0  and  <g_j, n> = 0 per column,

with n the inward normal.  The conditions do not depend on whether (f, g)
is read in the Ito or the Stratonovich sense, so systems of either
interpretation are checked as-is.

The checkers here are falsifiers: they sample each face with a
deterministic low-discrepancy (or hit-and-run) scheme, apply the
conditions within configured tolerances and return margins plus concrete
witness points for every violation found.  A Violated verdict is
constructive; a Satisfied verdict certifies the sampled points only.

A related pairwise test orders two systems: solutions started below stay
below when, whenever x_i = y_i and x_k >= y_k on the coupled coordinates,
the first drift dominates (f_i(t, x) >= f2_i(t, y)) and the row-i
diffusions agree.  :func:`check_comparison` samples exactly these pairs.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from .core import (Array, Box, ModelEvaluationError, Polyhedron, SdeSystem,
                   UsageError, diffusion_batch, drift_batch)

_INTERIOR_BUDGET = 4096
_ANCHOR_TRIES = 64


class Verdict(enum.Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"


@dataclass(frozen=True)
class CheckConfig:
    """Sampling budget and tolerances for the invariance checkers.

    eps_drift is a one-sided slack on the inward-drift inequalities; a
    margin exactly at the tolerance still counts as satisfied.  eps_diff
    bounds |diffusion| on faces two-sidedly.  Coordinates that the region
    leaves free are sampled from the system's declared coord_ranges, or
    from fallback_range when the system declares none.
    """

    n_face_samples: int = 4096
    n_time_samples: int = 16
    t_max_check: float = 100.0
    eps_drift: float = 1e-9
    eps_diff: float = 1e-12
    sampler_seed: int = 0
    fallback_range: Tuple[float, float] = (-10.0, 10.0)
    max_witnesses_per_face: int = 16

    def __post_init__(self):
        if self.n_face_samples < 1 or self.n_time_samples < 1:
            raise UsageError("sample budgets must be >= 1")
        if not self.t_max_check > 0:
            raise UsageError("t_max_check must be positive")
        if not self.eps_drift > 0 or not self.eps_diff > 0:
            raise UsageError("tolerances must be positive")
        lo, hi = self.fallback_range
        if not lo < hi:
            raise UsageError("fallback_range needs lo < hi")
        if self.max_witnesses_per_face < 1:
            raise UsageError("max_witnesses_per_face must be >= 1")


@dataclass(frozen=True)
class Witness:
    """One concrete point where a face condition fails."""

    face_index: int
    side: str
    t: float
    x: Tuple[float, ...]
    kind: str  # "drift_sign" or "diffusion_nonzero"
    value: float
    partner: Optional[Tuple[float, ...]] = None

    def to_dict(self) -> dict:
        d = {"t": self.t, "x": list(self.x), "kind": self.kind,
             "value": self.value}
        if self.partner is not None:
            d["y"] = list(self.partner)
        return d


@dataclass(frozen=True)
class FaceReport:
    """Aggregate margins and witnesses for one face (or pair index)."""

    index: int
    side: str  # "lower" / "upper" / "hyperplane" / "pair"
    n_samples: int
    min_drift_margin: Optional[float]
    max_diffusion_abs: Optional[float]
    witnesses: Tuple[Witness, ...]

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "side": self.side,
            "n_samples": self.n_samples,
            "min_drift_margin": self.min_drift_margin,
            "max_diffusion_abs": self.max_diffusion_abs,
            "witnesses": [w.to_dict() for w in self.witnesses],
        }


@dataclass(frozen=True)
class CheckReport:
    """Verdict plus per-face evidence; violated iff witnesses exist."""

    verdict: Verdict
    faces: Tuple[FaceReport, ...]
    config: CheckConfig

    @property
    def witnesses(self) -> Tuple[Witness, ...]:
        return tuple(w for f in self.faces for w in f.witnesses)

    def face(self, index: int, side: str) -> FaceReport:
        for f in self.faces:
            if f.index == index and f.side == side:
                return f
        raise KeyError(f"no face ({index}, {side}) in report")

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "faces": [f.to_dict() for f in self.faces],
            "config_echo": asdict(self.config),
        }

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _check_times(cfg: CheckConfig) -> Array:
    if cfg.n_time_samples == 1:
        return np.array([0.0])
    return np.linspace(0.0, cfg.t_max_check, cfg.n_time_samples)


def _coord_windows(sys: SdeSystem, cfg: CheckConfig) -> Tuple[Tuple[float, float], ...]:
    if sys.coord_ranges is not None:
        return sys.coord_ranges
    return (cfg.fallback_range,) * sys.m


def _face_interval(a: float, b: float,
                   window: Tuple[float, float]) -> Tuple[float, float]:
    """Sampling interval for one coordinate inside bounds [a, b]."""
    lo, hi = window
    lo_eff = max(a, lo) if math.isfinite(a) else lo
    hi_eff = min(b, hi) if math.isfinite(b) else hi
    if lo_eff < hi_eff:
        return (lo_eff, hi_eff)
    # plausibility window misses the box; fall back to the box itself
    span = hi - lo
    if math.isfinite(a) and math.isfinite(b):
        return (a, b)
    if math.isfinite(a):
        return (a, a + span)
    if math.isfinite(b):
        return (b - span, b)
    return (lo, hi)


def _child_rng(cfg: CheckConfig, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=cfg.sampler_seed, spawn_key=key)
    return np.random.default_rng(ss)


def _halton(cfg: CheckConfig, dim: int, *key: int) -> Array:
    eng = qmc.Halton(d=dim, scramble=True, seed=_child_rng(cfg, *key))
    return eng.random(cfg.n_face_samples)


def _require_finite(values: Array, what: str, t: float, points: Array):
    bad = ~np.isfinite(values)
    if bad.any():
        k = int(np.argwhere(bad)[0][0])
        raise ModelEvaluationError(
            f"{what} is not finite at t={t} during an invariance check",
            t=t, x=points[k], index=k)


def _box_face_points(sys: SdeSystem, box: Box, cfg: CheckConfig,
                     coord: int, pin: float, ordinal: int) -> Array:
    m = sys.m
    free = [j for j in range(m) if j != coord]
    if not free:
        x = np.empty((1, 1))
        x[0, 0] = pin
        return x
    u = _halton(cfg, len(free), 1, ordinal)
    windows = _coord_windows(sys, cfg)
    pts = np.empty((u.shape[0], m))
    pts[:, coord] = pin
    for col, j in enumerate(free):
        a, b = box.bound(j)
        lo, hi = _face_interval(a, b, windows[j])
        pts[:, j] = lo + u[:, col] * (hi - lo)
    return pts


def check_box(sys: SdeSystem, box: Box, cfg: CheckConfig = CheckConfig()
              ) -> CheckReport:
    """Check invariance of a box region for a system.

    Each finite face is sampled with a scrambled Halton sequence (pinned
    coordinate fixed, free coordinates drawn inside the box intersected
    with the plausibility windows) at times spread over [0, t_max_check].
    Both interpretations are handled identically because the face
    conditions are interpretation-independent.
    """
    if max(box.indices) >= sys.m:
        raise UsageError("box constrains a coordinate outside the state")
    times = _check_times(cfg)
    faces = []
    violated = False
    for ordinal, (i, side, pin) in enumerate(box.faces()):
        pts = _box_face_points(sys, box, cfg, i, pin, ordinal)
        n = pts.shape[0]
        min_margin = math.inf
        max_gabs = 0.0
        wit: list[Witness] = []
        for t in times:
            f_row = drift_batch(sys, t, pts)[:, i]
            _require_finite(f_row, f"drift component {i} on face "
                            f"({i}, {side})", t, pts)
            margin = f_row if side == "lower" else -f_row
            min_margin = min(min_margin, float(margin.min()))
            g_row = diffusion_batch(sys, t, pts)[:, i, :]
            _require_finite(g_row, f"diffusion row {i} on face "
                            f"({i}, {side})", t, pts)
            g_abs = np.abs(g_row)
            if g_abs.size:
                max_gabs = max(max_gabs, float(g_abs.max()))
            for k in np.flatnonzero(margin < -cfg.eps_drift):
                violated = True
                if len(wit) < cfg.max_witnesses_per_face:
                    wit.append(Witness(i, side, float(t), tuple(pts[k]),
                                       "drift_sign", float(f_row[k])))
            for k, j in np.argwhere(g_abs > cfg.eps_diff):
                violated = True
                if len(wit) < cfg.max_witnesses_per_face:
                    wit.append(Witness(i, side, float(t), tuple(pts[k]),
                                       "diffusion_nonzero",
                                       float(g_row[k, j])))
        faces.append(FaceReport(i, side, n, float(min_margin), max_gabs,
                                tuple(wit)))
    verdict = Verdict.VIOLATED if violated else Verdict.SATISFIED
    return CheckReport(verdict, tuple(faces), cfg)


def check_positivity(sys: SdeSystem, indices: Sequence[int],
                     cfg: CheckConfig = CheckConfig()) -> CheckReport:
    """Check invariance of the cone {x_i >= 0 for i in indices}.

    Delegates to :func:`check_box` with one-sided bounds [0, inf); only
    the lower faces exist, so only they are sampled.
    """
    return check_box(sys, Box.positive(tuple(indices)), cfg)


def check_comparison(sys_a: SdeSystem, sys_b: SdeSystem,
                     indices: Sequence[int],
                     cfg: CheckConfig = CheckConfig()) -> CheckReport:
    """Check the pairwise ordering conditions between two systems.

    For each coupled coordinate i the sampler draws pairs (x, y) with
    x_i = y_i and x_k >= y_k for the other coupled coordinates k, then
    requires drift domination f_a_i(t, x) >= f_b_i(t, y) within eps_drift
    and row-i diffusion agreement within eps_diff.  Witness entries carry
    both points (x and partner y).
    """
    if sys_a.m != sys_b.m or sys_a.r != sys_b.r:
        raise UsageError("compared systems must share state and noise "
                         "dimensions")
    m = sys_a.m
    idx = tuple(sorted(int(i) for i in indices))
    if not idx:
        raise UsageError("comparison needs at least one coupled coordinate")
    if len(set(idx)) != len(idx) or idx[0] < 0 or idx[-1] >= m:
        raise UsageError("comparison indices must be distinct and in range")
    windows = _coord_windows(sys_a, cfg)
    times = _check_times(cfg)
    faces = []
    violated = False
    for ordinal, i in enumerate(idx):
        u = _halton(cfg, 2 * m - 1, 2, ordinal)
        n = u.shape[0]
        y = np.empty((n, m))
        for j in range(m):
            lo, hi = windows[j]
            y[:, j] = lo + u[:, j] * (hi - lo)
        x = y.copy()
        col = m
        for k in idx:
            if k == i:
                continue
            lo, hi = windows[k]
            x[:, k] = y[:, k] + u[:, col] * (hi - lo)
            col += 1
        for j in range(m):
            if j in idx:
                continue
            lo, hi = windows[j]
            x[:, j] = lo + u[:, col] * (hi - lo)
            col += 1
        min_margin = math.inf
        max_dev = 0.0
        wit: list[Witness] = []
        for t in times:
            fa = drift_batch(sys_a, t, x)[:, i]
            fb = drift_batch(sys_b, t, y)[:, i]
            _require_finite(fa, f"first drift component {i}", t, x)
            _require_finite(fb, f"second drift component {i}", t, y)
            margin = fa - fb
            min_margin = min(min_margin, float(margin.min()))
            ga = diffusion_batch(sys_a, t, x)[:, i, :]
            gb = diffusion_batch(sys_b, t, y)[:, i, :]
            _require_finite(ga, f"first diffusion row {i}", t, x)
            _require_finite(gb, f"second diffusion row {i}", t, y)
            dev = ga - gb
            dev_abs = np.abs(dev)
            if dev_abs.size:
                max_dev = max(max_dev, float(dev_abs.max()))
            for k in np.flatnonzero(margin < -cfg.eps_drift):
                violated = True
                if len(wit) < cfg.max_witnesses_per_face:
                    wit.append(Witness(i, "pair", float(t), tuple(x[k]),
                                       "drift_sign", float(margin[k]),
                                       partner=tuple(y[k])))
            for k, j in np.argwhere(dev_abs > cfg.eps_diff):
                violated = True
                if len(wit) < cfg.max_witnesses_per_face:
                    wit.append(Witness(i, "pair", float(t), tuple(x[k]),
                                       "diffusion_nonzero",
                                       float(dev[k, j]),
                                       partner=tuple(y[k])))
        faces.append(FaceReport(i, "pair", n, float(min_margin), max_dev,
                                tuple(wit)))
    verdict = Verdict.VIOLATED if violated else Verdict.SATISFIED
    return CheckReport(verdict, tuple(faces), cfg)


# -- polyhedron support ------------------------------------------------------

def _window_bounds(sys: SdeSystem, cfg: CheckConfig) -> Tuple[Array, Array]:
    windows = _coord_windows(sys, cfg)
    lo = np.array([w[0] for w in windows])
    hi = np.array([w[1] for w in windows])
    return lo, hi


def _face_margins(x: Array, anchors: Array, normals: Array) -> Array:
    return np.einsum("fm,fm->f", x[None, :] - anchors, normals)


def _find_interior(anchors: Array, normals: Array, lo: Array, hi: Array,
                   cfg: CheckConfig) -> Array:
    """Best strictly-interior point from deterministic candidates."""
    m = lo.size
    candidates = [np.clip(anchors.mean(axis=0), lo, hi), 0.5 * (lo + hi)]
    eng = qmc.Halton(d=m, scramble=True, seed=_child_rng(cfg, 3))
    u = eng.random(_INTERIOR_BUDGET)
    sampled = lo + u * (hi - lo)
    best = None
    best_margin = -math.inf
    for cand in candidates + list(sampled):
        margin = float(_face_margins(np.asarray(cand), anchors,
                                     normals).min())
        if margin > best_margin:
            best_margin = margin
            best = np.asarray(cand, dtype=float)
    if best is None or best_margin <= 0.0:
        raise UsageError(
            "could not find a strictly interior point of the polyhedron "
            "within the sampling window; pass interior_point= explicitly")
    return best


def _first_hit(x0: Array, d: Array, anchors: Array, normals: Array,
               lo: Array, hi: Array, target: int) -> Optional[Array]:
    """Walk from x0 along d; return the hit point if the first boundary
    reached is the target face's hyperplane (within the window)."""
    margins = _face_margins(x0, anchors, normals)
    rate = normals @ d
    if rate[target] >= -1e-14:
        return None  # not heading toward the target plane
    s_target = margins[target] / -rate[target]
    s_block = math.inf
    for nu in range(anchors.shape[0]):
        if nu == target or rate[nu] >= -1e-14:
            continue
        s_block = min(s_block, margins[nu] / -rate[nu])
    for j in range(lo.size):
        if d[j] > 1e-14:
            s_block = min(s_block, (hi[j] - x0[j]) / d[j])
        elif d[j] < -1e-14:
            s_block = min(s_block, (lo[j] - x0[j]) / d[j])
    if s_target > s_block * (1.0 + 1e-12) + 1e-12:
        return None
    hit = x0 + s_target * d
    # snap exactly onto the hyperplane
    hit = hit - _face_margins(hit, anchors, normals)[target] * normals[target]
    return hit


def _face_anchor(x0: Array, anchors: Array, normals: Array, lo: Array,
                 hi: Array, target: int,
                 rng: np.random.Generator) -> Optional[Array]:
    hit = _first_hit(x0, -normals[target], anchors, normals, lo, hi, target)
    if hit is not None:
        return hit
    for _ in range(_ANCHOR_TRIES):
        d = -normals[target] + 0.5 * rng.standard_normal(x0.size)
        norm = np.linalg.norm(d)
        if norm < 1e-12:
            continue
        hit = _first_hit(x0, d / norm, anchors, normals, lo, hi, target)
        if hit is not None:
            return hit
    return None


def _hit_and_run(q0: Array, anchors: Array, normals: Array, lo: Array,
                 hi: Array, target: int, n: int,
                 rng: np.random.Generator) -> Array:
    """Sample n points on {<x - a, n> = 0} cap K cap window via a
    hit-and-run walk in the face's tangent space."""
    m = q0.size
    nrm = normals[target]
    pts = np.empty((n, m))
    q = q0.copy()
    for it in range(n):
        direction = None
        for _ in range(8):
            d = rng.standard_normal(m)
            d = d - (d @ nrm) * nrm
            dn = np.linalg.norm(d)
            if dn > 1e-12:
                direction = d / dn
                break
        if direction is not None:
            margins = _face_margins(q, anchors, normals)
            rate = normals @ direction
            s_lo, s_hi = -math.inf, math.inf
            for nu in range(anchors.shape[0]):
                if nu == target:
                    continue
                if rate[nu] > 1e-14:
                    s_lo = max(s_lo, -margins[nu] / rate[nu])
                elif rate[nu] < -1e-14:
                    s_hi = min(s_hi, margins[nu] / -rate[nu])
            for j in range(m):
                if direction[j] > 1e-14:
                    s_hi = min(s_hi, (hi[j] - q[j]) / direction[j])
                    s_lo = max(s_lo, (lo[j] - q[j]) / direction[j])
                elif direction[j] < -1e-14:
                    s_hi = min(s_hi, (lo[j] - q[j]) / direction[j])
                    s_lo = max(s_lo, (hi[j] - q[j]) / direction[j])
            if not math.isfinite(s_lo):
                s_lo = 0.0
            if not math.isfinite(s_hi):
                s_hi = 0.0
            s_lo = min(s_lo, 0.0)
            s_hi = max(s_hi, 0.0)
            step = s_lo + rng.random() * (s_hi - s_lo)
            q = q + step * direction
            q = q - _face_margins(q, anchors, normals)[target] * nrm
        pts[it] = q
    return pts


def check_polyhedron(sys: SdeSystem, poly: Polyhedron,
                     cfg: CheckConfig = CheckConfig(),
                     interior_point=None) -> CheckReport:
    """Check invariance of an intersection of half-spaces.

    For each half-space the checker needs points on the bounding
    hyperplane that also satisfy the remaining constraints.  It finds a
    strictly interior point (sampled deterministically, or supplied via
    interior_point), walks it onto each face, then explores the face with
    a seeded hit-and-run walk confined to the plausibility window.  On
    the sampled points it requires <f, n> >= -eps_drift and
    |<g_j, n>| <= eps_diff per noise column, with unit-normalized n.

    A face that cannot be reached inside the window contributes no
    samples and is reported with n_samples = 0.
    """
    if not poly.halfspaces:
        return CheckReport(Verdict.SATISFIED, (), cfg)
    if poly.dim != sys.m:
        raise UsageError(
            f"polyhedron lives in dimension {poly.dim}, system in {sys.m}")
    anchors = np.array([h.anchor for h in poly.halfspaces], dtype=float)
    normals = np.array([h.normal for h in poly.halfspaces], dtype=float)
    normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)
    lo, hi = _window_bounds(sys, cfg)
    if interior_point is not None:
        x0 = np.asarray(interior_point, dtype=float)
        if x0.shape != (sys.m,):
            raise UsageError("interior_point must have shape (m,)")
        if _face_margins(x0, anchors, normals).min() <= 0.0:
            raise UsageError("interior_point is not strictly interior")
    else:
        x0 = _find_interior(anchors, normals, lo, hi, cfg)
    times = _check_times(cfg)
    faces = []
    violated = False
    for nu in range(anchors.shape[0]):
        rng = _child_rng(cfg, 4, nu)
        q0 = _face_anchor(x0, anchors, normals, lo, hi, nu, rng)
        if q0 is None:
            faces.append(FaceReport(nu, "hyperplane", 0, None, None, ()))
            continue
        pts = _hit_and_run(q0, anchors, normals, lo, hi, nu,
                           cfg.n_face_samples, rng)
        nrm = normals[nu]
        min_margin = math.inf
        max_gabs = 0.0
        wit: list[Witness] = []
        for t in times:
            f_all = drift_batch(sys, t, pts)
            f_n = f_all @ nrm
            _require_finite(f_n, f"drift projection on face {nu}", t, pts)
            min_margin = min(min_margin, float(f_n.min()))
            g_all = diffusion_batch(sys, t, pts)
            g_n = np.einsum("kmr,m->kr", g_all, nrm)
            _require_finite(g_n, f"diffusion projection on face {nu}",
                            t, pts)
            g_abs = np.abs(g_n)
            if g_abs.size:
                max_gabs = max(max_gabs, float(g_abs.max()))
            for k in np.flatnonzero(f_n < -cfg.eps_drift):
                violated = True
                if len(wit) < cfg.max_witnesses_per_face:
                    wit.append(Witness(nu, "hyperplane", float(t),
                                       tuple(pts[k]), "drift_sign",
                                       float(f_n[k])))
            for k, j in np.argwhere(g_abs > cfg.eps_diff):
                violated = True
                if len(wit) < cfg.max_witnesses_per_face:
                    wit.append(Witness(nu, "hyperplane", float(t),
                                       tuple(pts[k]), "diffusion_nonzero",
                                       float(g_n[k, j])))
        faces.append(FaceReport(nu, "hyperplane", pts.shape[0],
                                float(min_margin), max_gabs, tuple(wit)))
    verdict = Verdict.VIOLATED if violated else Verdict.SATISFIED
    return CheckReport(verdict, tuple(faces), cfg)
