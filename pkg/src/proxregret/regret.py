"""Regret accounting over a played trace.

All primary accounting is linearized: regret against a comparator f is
sum_t <g^t, x^t - prox_f(x^t)>, which upper-bounds the true-loss gap whenever
the losses are convex and g^t is a (sub)gradient at x^t.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import bregman as brg
from . import comparators as cmp
from .errors import NotAnEndomorphism, UnboundedSetError
from .geometry import ConvexSet


@dataclass
class Trace:
    """Per-round record of a run: points x^t, feedback g^t, step sizes eta_t.

    Rounds are 1-based. ``anchors`` holds the optimistic learner's anchor
    sequence w^0 .. w^T when available.
    """

    set: ConvexSet
    xs: np.ndarray
    gs: np.ndarray
    etas: np.ndarray
    anchors: np.ndarray | None = None

    def __post_init__(self):
        self.xs = np.atleast_2d(np.asarray(self.xs, dtype=float))
        self.gs = np.atleast_2d(np.asarray(self.gs, dtype=float))
        self.etas = np.asarray(self.etas, dtype=float).ravel()
        if self.xs.shape != self.gs.shape:
            raise ValueError("xs and gs must have matching shapes")
        if len(self.etas) != len(self.xs):
            raise ValueError("etas must have one entry per round")
        if self.anchors is not None:
            self.anchors = np.atleast_2d(np.asarray(self.anchors, dtype=float))
            if len(self.anchors) != len(self.xs) + 1:
                raise ValueError("anchors must run w^0 .. w^T")

    @property
    def T(self):
        return len(self.xs)

    @property
    def dim(self):
        return self.xs.shape[1]

    def feasibility_residual(self):
        """Max distance from any played point to its projection (0 when feasible)."""
        return float(np.max(np.linalg.norm(self.set.project(self.xs) - self.xs, axis=1)))


@dataclass
class RegretReport:
    """Linearized regret against one comparator plus its cached prox trajectory."""

    comparator_id: str
    regret: float
    prox_path: np.ndarray = field(repr=False)
    fvals: np.ndarray = field(repr=False)
    D_obs: float = 0.0
    Bf_obs: float = 0.0
    path_sq: float = 0.0  # sum_t ||p^t - p^{t+1}||^2


def _report_from_path(trace, f, ps, fvals, mirror=None):
    gaps = trace.xs - ps
    regret = float(np.sum(trace.gs * gaps))
    if mirror is None or mirror.kind == "euclidean":
        d_obs = float(np.max(np.linalg.norm(gaps, axis=1)))
    else:
        d_obs = float(np.max(brg.bregman_div_rows(mirror, ps, trace.xs)))
    finite = fvals[np.isfinite(fvals)]
    bf_obs = float(finite.max() - finite.min()) if finite.size else 0.0
    if trace.T > 1:
        if mirror is None:
            steps = np.linalg.norm(np.diff(ps, axis=0), axis=1)
        else:
            steps = mirror.primal_norm_rows(np.diff(ps, axis=0))
        path_sq = float(np.sum(steps**2))
    else:
        path_sq = 0.0
    return RegretReport(f.label or f.kind, regret, ps, fvals, d_obs, bf_obs, path_sq)


def proximal_regret(trace, f, tol=cmp.DEFAULT_PROX_TOL, max_iter=cmp.DEFAULT_PROX_MAX_ITER):
    """Linearized proximal regret sum_t <g^t, x^t - prox_f(x^t)> with observables."""
    ps = cmp.prox_rows(f, trace.set, trace.xs, tol=tol, max_iter=max_iter)
    fvals = cmp.evaluate_rows(f, ps)
    return _report_from_path(trace, f, ps, fvals)


def bregman_proximal_regret(trace, f, mirror, tol=cmp.DEFAULT_PROX_TOL,
                            max_iter=cmp.DEFAULT_PROX_MAX_ITER):
    """Proximal regret with the prox taken in the mirror map's geometry.

    The report's ``D_obs`` is the largest divergence D(p^t | x^t) and
    ``path_sq`` accumulates squared prox steps in the map's primal norm.
    """
    ps = brg.bregman_prox_rows(f, mirror, trace.xs, tol=tol, max_iter=max_iter)
    fvals = cmp.evaluate_rows(f, ps)
    return _report_from_path(trace, f, ps, fvals, mirror=mirror)


def family_regret(trace, family, **kwargs):
    """Max proximal regret over a comparator family.

    ``family`` is a sequence of comparators or a callable producing one from
    the trace (used by families with a trace-dependent exact maximizer).
    Returns ``(best_report, all_reports)``.
    """
    members = family(trace) if callable(family) else list(family)
    if not members:
        raise ValueError("comparator family is empty")
    reports = [proximal_regret(trace, f, **kwargs) for f in members]
    best = max(reports, key=lambda r: r.regret)
    return best, reports


def unit_linear_family(count=16, seed=0):
    """Unit-norm linear comparators; exact maximizer on unconstrained traces.

    On the whole space the prox is x -> x - v, so the family regret equals
    T <mean g, v> maximized at v = mean g / ||mean g||; no sampling needed.
    """

    def build(trace):
        if trace.set.kind == "whole":
            gbar = trace.gs.mean(axis=0)
            nrm = np.linalg.norm(gbar)
            if nrm == 0.0:
                return [cmp.constant(trace.dim, label="unit-linear-degenerate")]
            return [cmp.linear(gbar / nrm, label="unit-linear-max")]
        rng = np.random.default_rng(seed)
        return cmp.unit_linear_directions(trace.dim, count, rng)

    return build


def external_regret(trace, comparator_radius=None):
    """Exact linearized external regret max_{x in set} sum_t <g^t, x^t - x>.

    Simplices enumerate vertices, boxes optimize coordinatewise, balls follow
    the summed gradient direction. Unbounded sets require
    ``comparator_radius``.
    """
    gsum = trace.gs.sum(axis=0)
    played = float(np.sum(trace.gs * trace.xs))
    s = trace.set
    if s.kind == "simplex":
        best = float(np.min(s.extreme_points() @ gsum))
    elif s.kind == "box":
        # separable: each coordinate picks its own best endpoint
        best = float(np.sum(np.where(gsum >= 0, s.lo, s.hi) * gsum))
    elif s.kind == "ball":
        best = float(s.center @ gsum) - s.radius * float(np.linalg.norm(gsum))
    elif s.kind == "whole":
        if comparator_radius is None:
            raise UnboundedSetError("external regret on an unbounded set needs a comparator radius")
        best = -float(comparator_radius) * float(np.linalg.norm(gsum))
    else:
        raise ValueError(f"unknown set kind {s.kind!r}")
    return played - best


def gradient_equilibrium_norm(trace):
    """Norm of the time-averaged feedback ||(1/T) sum_t g^t||."""
    if trace.T == 0:
        raise ValueError("empty trace")
    return float(np.linalg.norm(trace.gs.mean(axis=0)))


def symmetric_linear_swap_regret(trace, A, b=None, tol=1e-8):
    """Linearized regret against the affine modification x -> A x + b.

    A must be symmetric and the map must keep every trace point inside the
    set; the first violation aborts with a witness.
    """
    A = np.asarray(A, dtype=float)
    if not np.allclose(A, A.T, atol=1e-9):
        raise ValueError("A must be symmetric")
    d = trace.dim
    b = np.zeros(d) if b is None else np.asarray(b, dtype=float)
    images = trace.xs @ A.T + b
    inside = trace.set.contains(images, tol=tol)
    if not np.all(inside):
        t_bad = int(np.argmin(inside))
        raise NotAnEndomorphism(
            f"affine map leaves the set at round {t_bad + 1}", t_bad + 1, images[t_bad]
        )
    return float(np.sum(trace.gs * (trace.xs - images)))
