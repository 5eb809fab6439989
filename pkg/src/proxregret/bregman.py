"""Distance-generating functions, Bregman divergences, and Bregman proxes.

Two mirror maps are built in: the squared Euclidean norm (whose Bregman prox
coincides with the Euclidean prox) and negative entropy on the simplex (whose
divergence is the generalized KL, 1-strongly convex in the 1-norm by Pinsker).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import comparators as cmp
from .errors import BoundaryDivergence, ProxNonconvergence
from .geometry import ConvexSet

# Iterates are floored here after renormalization; entropy dynamics keep
# points strictly positive in exact arithmetic, this only guards underflow.
ENTROPY_FLOOR = 1e-300


@dataclass
class MirrorMap:
    """A 1-strongly convex distance generator over its domain.

    ``kind`` is ``euclidean`` (norm pair l2/l2) or ``entropy`` (norm pair
    l1/l-infinity, domain restricted to the probability simplex).
    """

    kind: str
    domain: ConvexSet

    def __post_init__(self):
        if self.kind not in ("euclidean", "entropy"):
            raise ValueError(f"unknown mirror map {self.kind!r}")
        if self.kind == "entropy" and (self.domain.kind != "simplex" or self.domain.offset is not None):
            raise ValueError("entropy map requires an untranslated simplex domain")

    @property
    def norm_name(self):
        return "euclidean" if self.kind == "euclidean" else "l1"

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "euclidean":
            return 0.5 * float(x @ x)
        pos = x[x > 0]
        return float(np.sum(pos * np.log(pos)))  # 0 log 0 = 0

    def grad_phi(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "euclidean":
            return x.copy()
        if np.min(x) <= 0.0:
            raise BoundaryDivergence("entropy gradient undefined on the boundary")
        return np.log(x) + 1.0

    def primal_norm_rows(self, deltas):
        deltas = np.atleast_2d(deltas)
        if self.kind == "euclidean":
            return np.linalg.norm(deltas, axis=1)
        return np.abs(deltas).sum(axis=1)

    def dual_norm_rows(self, gs):
        gs = np.atleast_2d(gs)
        if self.kind == "euclidean":
            return np.linalg.norm(gs, axis=1)
        return np.abs(gs).max(axis=1)


def euclidean_map(domain):
    return MirrorMap("euclidean", domain)


def entropy_map(domain):
    return MirrorMap("entropy", domain)


def bregman_div(mirror, x, y):
    """D(x|y) = phi(x) - phi(y) - <grad phi(y), x - y>, always >= 0.

    Entropy kind gives the generalized KL sum x_i log(x_i / y_i) - x_i + y_i;
    ``y`` must be interior (strictly positive).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if mirror.kind == "euclidean":
        return 0.5 * float(np.sum((x - y) ** 2))
    if np.min(y) <= 0.0:
        raise BoundaryDivergence("boundary divergence: y has a zero coordinate")
    if np.min(x) < 0.0:
        raise ValueError("x must be non-negative for the entropy divergence")
    terms = np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0) / y), 0.0)
    return float(np.sum(terms) - x.sum() + y.sum())


def bregman_div_rows(mirror, xs, ys):
    xs = np.atleast_2d(xs)
    ys = np.atleast_2d(ys)
    if mirror.kind == "euclidean":
        return 0.5 * np.sum((xs - ys) ** 2, axis=1)
    if np.min(ys) <= 0.0:
        raise BoundaryDivergence("boundary divergence: reference rows touch the boundary")
    terms = np.where(xs > 0, xs * np.log(np.where(xs > 0, xs, 1.0) / ys), 0.0)
    return terms.sum(axis=1) - xs.sum(axis=1) + ys.sum(axis=1)


def _entropy_step_rows(xs, gs):
    """Rows x_i * exp(-g_i), renormalized on the simplex with overflow shift."""
    logits = np.log(np.maximum(xs, ENTROPY_FLOOR)) - gs
    logits -= logits.max(axis=-1, keepdims=True)
    w = np.exp(logits)
    w /= w.sum(axis=-1, keepdims=True)
    return np.maximum(w, ENTROPY_FLOOR)


def md_argmin(mirror, x, g, eta):
    """The mirror-descent update argmin_y { eta <g, y> + D(y|x) }.

    Entropy: multiplicative reweighting; Euclidean: projected gradient step.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    x = np.asarray(x, dtype=float)
    g = np.asarray(g, dtype=float)
    if mirror.kind == "euclidean":
        return mirror.domain.project(x - eta * g)
    return _entropy_step_rows(x[None, :], eta * g[None, :])[0]


def bregman_prox_rows(f, mirror, xs, tol=cmp.DEFAULT_PROX_TOL,
                      max_iter=cmp.DEFAULT_PROX_MAX_ITER):
    """argmin_y { f(y) + D(y|x) } for a batch of rows.

    Euclidean maps defer to the Euclidean prox. On the entropy geometry,
    indicator-point and linear comparators have closed forms; smooth quadratic
    comparators run a Bregman proximal-gradient loop. Indicator-of-set under
    entropy (information projection) is out of scope.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if mirror.kind == "euclidean":
        return cmp.prox_rows(f, mirror.domain, xs, tol=tol, max_iter=max_iter)
    if f.kind == "constant":
        return xs.copy()
    if f.kind == "point":
        return np.broadcast_to(f.point, xs.shape).copy()
    if f.kind == "linear":
        return _entropy_step_rows(xs, np.broadcast_to(f.direction, xs.shape))
    if f.kind == "quadratic":
        return _entropy_quadratic_prox_rows(f, xs, tol=tol, max_iter=max_iter)
    raise NotImplementedError(
        "entropy-geometry prox supports constant, point, linear, and quadratic comparators"
    )


def _entropy_quadratic_prox_rows(f, xs, tol, max_iter):
    # Bregman proximal gradient on h(p) = f(p) + D(p|x): each step solves
    # argmin <grad f(p_k), p> + D(p|x) + (1/s) D(p|p_k) in closed form.
    s = 1.0 / max(f.smoothness, 1e-12)
    s = min(s, 1.0)
    denom = 1.0 + 1.0 / s
    log_x = np.log(np.maximum(xs, ENTROPY_FLOOR))
    p = xs.copy()
    for _ in range(max_iter):
        grad = p @ f.quad + f.lin
        logits = (log_x + np.log(p) / s - grad) / denom
        logits -= logits.max(axis=-1, keepdims=True)
        nxt = np.exp(logits)
        nxt /= nxt.sum(axis=-1, keepdims=True)
        nxt = np.maximum(nxt, ENTROPY_FLOOR)
        disp = float(np.max(np.linalg.norm(nxt - p, axis=1)))
        p = nxt
        if disp <= tol:
            return p
    raise ProxNonconvergence(
        f"entropy prox did not reach tol={tol} within {max_iter} steps", disp
    )


def bregman_prox(f, mirror, x, tol=cmp.DEFAULT_PROX_TOL, max_iter=cmp.DEFAULT_PROX_MAX_ITER):
    """Bregman prox of f at x, with the same result contract as the Euclidean prox."""
    x = np.asarray(x, dtype=float)
    if mirror.kind == "entropy" and np.min(x) <= 0.0:
        raise BoundaryDivergence("x must be interior for the entropy prox")
    p = bregman_prox_rows(f, mirror, x[None, :], tol=tol, max_iter=max_iter)[0]
    v = cmp.witness_subgradient(f, x, p)
    if mirror.kind == "euclidean":
        residual = cmp.check_prox_optimality(f, mirror.domain, x, p)
    else:
        # First-order condition in mirror coordinates:
        # <grad phi(x) - v - grad phi(p), x' - p> <= 0 for all feasible x'.
        probes = mirror.domain.probe_points()
        direction = mirror.grad_phi(x) - v - mirror.grad_phi(np.maximum(p, ENTROPY_FLOOR))
        residual = float(np.max((probes - p) @ direction))
    return cmp.ProxResult(p, v, residual)
