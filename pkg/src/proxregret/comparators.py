"""Weakly convex comparator functions and their proximal operators.

A comparator is a proper, lower semi-continuous function f with weak-convexity
modulus rho < 1, evaluated over a feasible set. Its prox maps x to the unique
minimizer of f(p) + (1/2)||p - x||^2 over the set. Closed forms cover
indicators, linear, and unconstrained quadratic comparators; everything else
runs projected gradient on the (1 - rho)-strongly convex subproblem.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ProxNonconvergence
from .geometry import FLOAT_TOL, as_vector

DEFAULT_PROX_TOL = 1e-10
DEFAULT_PROX_MAX_ITER = 100_000


@dataclass
class Comparator:
    """A comparator function with an attached prox strategy.

    ``kind`` is one of ``constant``, ``point`` (indicator of one point),
    ``set`` (indicator of a convex subset), ``linear`` (f(x) = <v, x>), or
    ``quadratic`` (f(x) = (1/2) x^T Q x + c^T x). ``prox_affine`` records an
    affine map (A, b) known to equal the prox wherever A x + b stays feasible.
    """

    kind: str
    dim: int
    rho: float = 0.0
    alpha: float = 0.0
    smoothness: float = 0.0
    point: np.ndarray | None = None
    subset: ConvexSet | None = None
    direction: np.ndarray | None = None
    quad: np.ndarray | None = None
    lin: np.ndarray | None = None
    prox_affine: tuple | None = None
    label: str = ""

    def __post_init__(self):
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"weak-convexity modulus must be in [0, 1), got {self.rho}")


class ProxResult(NamedTuple):
    point: np.ndarray
    witness_subgradient: np.ndarray
    residual: float


# -- constructors -------------------------------------------------------------


def constant(dim, label="constant"):
    """The zero function; its prox is the identity."""
    return Comparator("constant", int(dim), label=label)


def indicator_point(x0, label=""):
    x0 = as_vector(x0, name="x0")
    return Comparator("point", x0.size, point=x0, label=label or "indicator-point")


def indicator_set(subset, label=""):
    """Indicator of a convex subset; the prox is projection onto it."""
    return Comparator(
        "set", subset.dim, subset=subset, label=label or f"indicator-{subset.kind}"
    )


def linear(v, label=""):
    v = as_vector(v, name="v")
    return Comparator("linear", v.size, direction=v, label=label or "linear")


def quadratic(Q, c=None, rho=None, label=""):
    """f(x) = (1/2) x^T Q x + c^T x for symmetric Q with min eigenvalue > -1.

    ``rho`` defaults to max(0, -lambda_min(Q)); a larger declared modulus (< 1)
    is accepted. The strong-convexity modulus is max(0, lambda_min(Q)).
    """
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValueError("Q must be a square matrix")
    if not np.allclose(Q, Q.T, atol=1e-9):
        raise ValueError("Q must be symmetric")
    d = Q.shape[0]
    c = np.zeros(d) if c is None else as_vector(c, dim=d, name="c")
    eigs = np.linalg.eigvalsh(Q)
    natural = max(0.0, float(-eigs[0]))
    if rho is None:
        rho = natural
    elif rho + 1e-12 < natural:
        raise ValueError(f"declared rho={rho} below the modulus {natural} required by Q")
    return Comparator(
        "quadratic",
        d,
        rho=float(rho),
        alpha=max(0.0, float(eigs[0])),
        smoothness=float(np.max(np.abs(eigs))),
        quad=Q,
        lin=c,
        label=label or "quadratic",
    )


# -- evaluation ----------------------------------------------------------------


def evaluate(f, x):
    """f(x), with +inf exactly when x violates an indicator."""
    x = as_vector(x, dim=f.dim)
    if f.kind == "constant":
        return 0.0
    if f.kind == "point":
        return 0.0 if np.linalg.norm(x - f.point) <= FLOAT_TOL else np.inf
    if f.kind == "set":
        return 0.0 if f.subset.contains(x) else np.inf
    if f.kind == "linear":
        return float(f.direction @ x)
    if f.kind == "quadratic":
        return float(0.5 * x @ f.quad @ x + f.lin @ x)
    raise ValueError(f"unknown comparator kind {f.kind!r}")


def evaluate_rows(f, xs):
    """Vectorized f over row vectors. Indicator rows evaluate to 0 or +inf."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    n = xs.shape[0]
    if f.kind == "constant":
        return np.zeros(n)
    if f.kind == "point":
        ok = np.linalg.norm(xs - f.point, axis=1) <= FLOAT_TOL
        return np.where(ok, 0.0, np.inf)
    if f.kind == "set":
        ok = f.subset.contains(xs)
        return np.where(ok, 0.0, np.inf)
    if f.kind == "linear":
        return xs @ f.direction
    if f.kind == "quadratic":
        return 0.5 * np.einsum("ni,ij,nj->n", xs, f.quad, xs) + xs @ f.lin
    raise ValueError(f"unknown comparator kind {f.kind!r}")


def witness_subgradient(f, x, p):
    """An explicit v in the subdifferential of f at p certifying optimality.

    Linear: the slope itself; quadratic: Q p + c; indicators: the normal-cone
    element x - p.
    """
    if f.kind == "constant":
        return np.zeros(f.dim)
    if f.kind in ("point", "set"):
        return np.asarray(x, dtype=float) - np.asarray(p, dtype=float)
    if f.kind == "linear":
        return f.direction.copy()
    if f.kind == "quadratic":
        return f.quad @ np.asarray(p, dtype=float) + f.lin
    raise ValueError(f"unknown comparator kind {f.kind!r}")


# -- prox ----------------------------------------------------------------------


def projected_gradient_prox_rows(quads, lins, xs, project_rows, steps,
                                 tol=DEFAULT_PROX_TOL, max_iter=DEFAULT_PROX_MAX_ITER):
    """Batched projected gradient for argmin_p f(p) + (1/2)||p - x||^2.

    ``quads`` is (d, d) shared across rows or (n, d, d) per-row; ``steps`` are
    the per-row step sizes 1/(1 + L_f). Rows are frozen as soon as their
    fixed-point displacement drops to ``tol``; the subproblem is strongly
    convex, so the iteration contracts linearly.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    n, d = xs.shape
    batched_q = np.asarray(quads).ndim == 3
    quads = np.asarray(quads, dtype=float)
    lins = np.atleast_2d(np.asarray(lins, dtype=float))
    if lins.shape[0] == 1 and n > 1:
        lins = np.broadcast_to(lins, (n, d))
    steps = np.asarray(steps, dtype=float)
    if steps.ndim == 0:
        steps = np.full(n, float(steps))

    out = project_rows(xs)
    active = np.arange(n)
    p, x_act, c_act, s_act = out.copy(), xs, lins, steps
    q_act = quads
    disp_max = 0.0
    for _ in range(max_iter):
        if active.size == 0:
            return out, disp_max
        if batched_q:
            qp = np.einsum("nij,nj->ni", q_act, p)
        else:
            qp = p @ quads
        grad = qp + c_act + p - x_act
        nxt = project_rows(p - s_act[:, None] * grad)
        disp = np.linalg.norm(nxt - p, axis=1)
        disp_max = float(disp.max())
        done = disp <= tol
        if done.any():
            out[active[done]] = nxt[done]
            keep = ~done
            active = active[keep]
            p, x_act, c_act, s_act = nxt[keep], x_act[keep], c_act[keep], s_act[keep]
            if batched_q:
                q_act = q_act[keep]
        else:
            p = nxt
    if active.size == 0:
        return out, disp_max
    raise ProxNonconvergence(
        f"prox iteration did not reach tol={tol} within {max_iter} steps", disp_max
    )


def prox_rows(f, s, xs, tol=DEFAULT_PROX_TOL, max_iter=DEFAULT_PROX_MAX_ITER):
    """Prox of f over the set for a batch of row vectors (closed forms batched)."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if f.kind == "constant":
        # Identity on the domain: feasible inputs pass through untouched so
        # that regret against the constant comparator is exactly zero.
        return xs.copy() if np.all(s.contains(xs)) else s.project(xs)
    if f.kind == "point":
        return np.broadcast_to(f.point, xs.shape).copy()
    if f.kind == "set":
        return f.subset.project(xs)
    if f.kind == "linear":
        return s.project(xs - f.direction)
    if f.kind == "quadratic":
        if f.prox_affine is not None:
            A, b = f.prox_affine
            candidate = xs @ A.T + b
            if np.all(s.contains(candidate, tol=1e-8)):
                # Re-project to scrub floating-point drift off the boundary.
                return s.project(candidate)
        if s.kind == "whole":
            sys = np.eye(f.dim) + f.quad
            return np.linalg.solve(sys, (xs - f.lin).T).T
        step = 1.0 / (1.0 + f.smoothness)
        points, _ = projected_gradient_prox_rows(
            f.quad, f.lin, xs, s.project, step, tol=tol, max_iter=max_iter
        )
        return points
    raise ValueError(f"unknown comparator kind {f.kind!r}")


def prox(f, s, x, tol=DEFAULT_PROX_TOL, max_iter=DEFAULT_PROX_MAX_ITER):
    """Prox of f at x over the set, with witness subgradient and residual.

    The residual is the probe-certified violation of the first-order
    optimality inequality (see :func:`check_prox_optimality`).
    """
    x = as_vector(x, dim=f.dim)
    p = prox_rows(f, s, x[None, :], tol=tol, max_iter=max_iter)[0]
    v = witness_subgradient(f, x, p)
    return ProxResult(p, v, check_prox_optimality(f, s, x, p))


def prox_iterative(f, s, x, tol=DEFAULT_PROX_TOL, max_iter=DEFAULT_PROX_MAX_ITER):
    """Iterative prox path, bypassing closed forms (agreement testing hook).

    Runs projected gradient with step 1/(1 + L_f) on the strongly convex
    subproblem; only smooth kinds (constant, linear, quadratic) are eligible.
    """
    x = as_vector(x, dim=f.dim)
    if f.kind in ("point", "set"):
        raise ValueError("iterative prox requires a smooth comparator")
    if f.kind == "constant":
        quads, lins = np.zeros((f.dim, f.dim)), np.zeros(f.dim)
    elif f.kind == "linear":
        quads, lins = np.zeros((f.dim, f.dim)), f.direction
    else:
        quads, lins = f.quad, f.lin
    step = 1.0 / (1.0 + f.smoothness)
    points, disp = projected_gradient_prox_rows(
        quads, lins, x[None, :], s.project, step, tol=tol, max_iter=max_iter
    )
    p = points[0]
    v = witness_subgradient(f, x, p)
    return ProxResult(p, v, float(disp))


def check_prox_optimality(f, s, x, p):
    """Max over probe members x' of <x - v - p, x' - p>, v the witness.

    Non-positive (up to solver tolerance) certifies p = prox_f(x) on the probe
    set; probes are the set's extreme points when enumerable, else 64 seeded
    members.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    v = witness_subgradient(f, x, p)
    probes = s.probe_points()
    return float(np.max((probes - p) @ (x - v - p)))


def key_inequality_gap(f, s, x, p, tol=DEFAULT_PROX_TOL, max_iter=DEFAULT_PROX_MAX_ITER):
    """Slack of the prox comparison inequality at (x, p).

    With p_x = prox_f(x), returns
        [2 f(p) - 2 f(p_x) - (1 - rho) ||p - p_x||^2] - [||x - p_x||^2 - ||x - p||^2],
    which is non-negative for every feasible pair when the prox is exact.
    """
    x = as_vector(x, dim=f.dim)
    p = as_vector(p, dim=f.dim)
    fp = evaluate(f, p)
    if not np.isfinite(fp):
        raise ValueError("comparator infeasible at p")
    px = prox_rows(f, s, x[None, :], tol=tol, max_iter=max_iter)[0]
    lhs = float(x @ x - 2 * x @ px + px @ px) - float(np.sum((x - p) ** 2))
    rhs = 2.0 * fp - 2.0 * evaluate(f, px) - (1.0 - f.rho) * float(np.sum((p - px) ** 2))
    return rhs - lhs


# -- affine endomorphisms as comparators ----------------------------------------


def affine_to_comparator(A, b=None):
    """Quadratic comparator whose prox realizes the affine map x -> A x + b.

    Requires A symmetric positive definite with either all eigenvalues <= 1
    (convex case, rho = 0) or all eigenvalues > 1/2 (smooth case,
    rho = ||A^{-1} - I||_2 < 1). The returned comparator is
    f(x) = (1/2) x^T (A^{-1} - I) x - (A^{-1} b)^T x and carries (A, b) as its
    closed-form prox wherever the image stays feasible.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be a square matrix")
    d = A.shape[0]
    if not np.allclose(A, A.T, atol=1e-9):
        raise ValueError("A must be symmetric")
    b = np.zeros(d) if b is None else as_vector(b, dim=d, name="b")
    eigs = np.linalg.eigvalsh(A)
    smin, smax = float(eigs[0]), float(eigs[-1])
    if smin <= 0.0 or not (smax <= 1.0 + 1e-12 or smin > 0.5):
        raise ValueError(
            "not prox-representable: need A positive definite with "
            "eigenvalues <= 1 or all > 1/2"
        )
    a_inv = np.linalg.inv(A)
    Q = 0.5 * (a_inv + a_inv.T) - np.eye(d)
    c = -a_inv @ b
    if np.max(np.abs(Q)) < 1e-14 and np.max(np.abs(c)) < 1e-14:
        out = constant(d, label="affine-identity")
    else:
        rho = 0.0 if smax <= 1.0 + 1e-12 else float(np.max(np.abs(np.linalg.eigvalsh(Q))))
        out = quadratic(Q, c, rho=rho, label="affine-prox")
    out.prox_affine = (A.copy(), b.copy())
    return out


def interpolate_endomorphism(A, b, alpha):
    """Blend an affine map with the identity: ((1-alpha) I + alpha A, alpha b)."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    A = np.asarray(A, dtype=float)
    b = as_vector(b, dim=A.shape[0], name="b")
    return (1.0 - alpha) * np.eye(A.shape[0]) + alpha * A, alpha * b


def contraction_weight(A):
    """The interpolation weight 1 / (3 (1 + ||A||_2)).

    At this weight the blended matrix has eigenvalues at least 2/3, so it is
    always prox-representable.
    """
    A = np.asarray(A, dtype=float)
    return 1.0 / (3.0 * (1.0 + float(np.linalg.norm(A, 2))))


def bf_bound_affine(A, b, D):
    """Upper bound 3 D^2 + D ||b|| on the comparator-value spread.

    Valid for the comparator induced by the contraction-weight interpolation
    of x -> A x + b over any feasible set inside the origin-centered ball of
    radius D. The value depends only on D and ||b||; A fixes the weight.
    """
    del A
    if D < 0:
        raise ValueError("D must be non-negative")
    return 3.0 * D * D + D * float(np.linalg.norm(np.asarray(b, dtype=float)))


# -- comparator families ---------------------------------------------------------


class EndomorphismComparator(NamedTuple):
    """An affine endomorphism with its interpolated prox-representable comparator."""

    A: np.ndarray
    b: np.ndarray
    alpha: float
    comparator: Comparator


def unit_linear_directions(dim, count, rng):
    """Linear comparators with unit-norm slopes."""
    vs = rng.normal(size=(count, dim))
    vs /= np.maximum(np.linalg.norm(vs, axis=1, keepdims=True), 1e-300)
    return [linear(v, label=f"unit-linear-{i}") for i, v in enumerate(vs)]


def vertex_indicators(s):
    """Indicator-point comparators at the set's extreme points."""
    verts = s.extreme_points()
    if verts is None:
        raise ValueError(f"{s.kind} set has no enumerable extreme points")
    return [indicator_point(v, label=f"vertex-{i}") for i, v in enumerate(verts)]


def point_indicators(s, count, rng):
    pts = s.sample(rng, count)
    return [indicator_point(p, label=f"point-{i}") for i, p in enumerate(pts)]


def strongly_convex_quadratics(s, count, rng, curvature=1.0):
    """Comparators f(x) = (1/2)(x - z)^T S (x - z) with lambda_min(S) >= curvature.

    Anchors z are sampled from the set; the constant term is dropped (it
    shifts values uniformly, so spreads and proxes are unchanged).
    """
    out = []
    anchors = s.sample(rng, count)
    for i in range(count):
        w = rng.normal(size=(s.dim, s.dim))
        basis, _ = np.linalg.qr(w)
        eigs = curvature + rng.uniform(0.0, 1.0, size=s.dim)
        S = (basis * eigs) @ basis.T
        S = 0.5 * (S + S.T)
        out.append(quadratic(S, -S @ anchors[i], label=f"strongly-convex-{i}"))
    return out


def _doubly_stochastic_symmetric(dim, rng, terms=None):
    terms = terms or dim + 2
    weights = rng.dirichlet(np.ones(terms))
    S = np.zeros((dim, dim))
    for w in weights:
        S += w * np.eye(dim)[rng.permutation(dim)]
    return 0.5 * (S + S.T)


def symmetric_endomorphisms(s, count, rng):
    """Random symmetric affine self-maps (A, b) of the given set.

    Simplex: symmetrized doubly stochastic matrices (b re-centers translated
    simplices). Box: coordinate contractions toward the midpoint. Ball:
    spectrally bounded symmetric maps anchored at the center.
    """
    maps = []
    for _ in range(count):
        if s.kind == "simplex":
            A = _doubly_stochastic_symmetric(s.dim, rng)
            anchor = np.zeros(s.dim) if s.offset is None else s.offset
            b = (np.eye(s.dim) - A) @ anchor
        elif s.kind == "box":
            beta = rng.uniform(0.0, 1.0, size=s.dim)
            A = np.diag(beta)
            b = (np.eye(s.dim) - A) @ (0.5 * (s.lo + s.hi))
        elif s.kind == "ball":
            w = rng.normal(size=(s.dim, s.dim))
            basis, _ = np.linalg.qr(w)
            eigs = rng.uniform(-0.9, 1.0, size=s.dim)
            A = (basis * eigs) @ basis.T
            A = 0.5 * (A + A.T)
            b = (np.eye(s.dim) - A) @ s.center
        else:
            raise ValueError(f"no endomorphism generator for {s.kind!r} sets")
        maps.append((A, b))
    return maps


def endomorphism_comparators(s, count, rng):
    """Prox-representable comparators for random symmetric endomorphisms of the set."""
    out = []
    for i, (A, b) in enumerate(symmetric_endomorphisms(s, count, rng)):
        alpha = contraction_weight(A)
        A_alpha, b_alpha = interpolate_endomorphism(A, b, alpha)
        comp = affine_to_comparator(A_alpha, b_alpha)
        comp.label = f"affine-endo-{i}"
        out.append(EndomorphismComparator(A, b, alpha, comp))
    return out
