"""Closed-form evaluation of every regret guarantee as a number.

Each function mirrors one stated bound so that empirical regret can be
asserted against it. Trace-dependent bounds consume the cached prox path from
a :class:`~proxregret.regret.RegretReport`; a-priori bounds take declared
constants. Conventions: D is a distance/diameter scale, B_f a comparator value
spread, G a gradient-norm bound, L a smoothness constant, T the horizon.
"""

from __future__ import annotations

import numpy as np

from . import bregman as brg
from .errors import StepSizeError


def _weighted_path_term(prox_path, etas):
    # sum_{t=1}^{T-1} ||p^t - p^{t+1}||^2 / eta_t
    if len(prox_path) < 2:
        return 0.0
    steps_sq = np.sum(np.diff(prox_path, axis=0) ** 2, axis=1)
    return float(np.sum(steps_sq / etas[:-1]))


def gd_full_bound(trace, report, rho=0.0, constant_form=False):
    """Trace-sharp regret bound for projected gradient descent.

        (D^2 + 2 B_f) / (2 eta_T) + sum_t (eta_t / 2) ||g^t||^2
            - ((1 - rho) / 2) sum_{t<T} ||p^t - p^{t+1}||^2 / eta_t

    with D = max_t ||x^t - p^t|| and B_f the spread of f over the prox path.
    ``constant_form=True`` uses the sharper constants available under a fixed
    step size: D = ||x^1 - p^1|| and B_f = f(p^1) - f(p^T). The non-positive
    final-distance term is omitted (conservative). Requires a non-increasing
    schedule.
    """
    eta_last = float(trace.etas[-1])
    if constant_form:
        D = float(np.linalg.norm(trace.xs[0] - report.prox_path[0]))
        B_f = float(report.fvals[0] - report.fvals[-1])
    else:
        D = report.D_obs
        B_f = report.Bf_obs
    grad_term = 0.5 * float(np.sum(trace.etas * np.sum(trace.gs**2, axis=1)))
    path_term = 0.5 * (1.0 - rho) * _weighted_path_term(report.prox_path, trace.etas)
    return (D * D + 2.0 * B_f) / (2.0 * eta_last) + grad_term - path_term


def gd_simple_bound(D, B_f, G, T):
    """(D^2 + B_f + G^2) sqrt(T); valid for eta_t = 1/sqrt(t) or 1/sqrt(T)."""
    return (D * D + B_f + G * G) * float(np.sqrt(T))


def gd_optimized_bound(D, B_f, G, T):
    """G sqrt(D^2 + 2 B_f) sqrt(T); valid for eta = sqrt((D^2 + 2 B_f)/(G^2 T))."""
    return G * float(np.sqrt(D * D + 2.0 * B_f)) * float(np.sqrt(T))


def symswap_bound(norm_A, D, norm_b, G, T):
    """3 (1 + ||A||_2) (4 D^2 + D ||b|| + G^2) sqrt(T).

    Regret bound against the affine modification x -> A x + b for gradient
    descent with eta_t = 1/sqrt(t) on a set inside the origin-centered ball of
    radius D, against convex G-Lipschitz losses.
    """
    return 3.0 * (1.0 + norm_A) * (4.0 * D * D + D * norm_b + G * G) * float(np.sqrt(T))


def og_adversarial_bound(trace, report, constant_form=False):
    """Gradient-variation regret bound for the optimistic learner.

        (D^2 + 2 B_f) / (2 eta_T) + sum_t eta_t ||g^t - g^{t-1}||^2
            - sum_t ||x^t - w^t||^2 / (2 eta_t)

    with g^0 = 0 and D = max_{0<=t<=T-1} ||w^t - p^{t+1}|| taken over the
    anchor sequence; under a fixed step size ``constant_form=True`` uses
    D = ||w^0 - p^1|| and B_f = f(p^1) - f(p^T). Valid for convex comparators.
    """
    if trace.anchors is None:
        raise ValueError("not an OG trace: anchor sequence w^0 .. w^T is missing")
    anchors = trace.anchors
    ps = report.prox_path
    if constant_form:
        D = float(np.linalg.norm(anchors[0] - ps[0]))
        B_f = float(report.fvals[0] - report.fvals[-1])
    else:
        D = float(np.max(np.linalg.norm(anchors[:-1] - ps, axis=1)))
        B_f = report.Bf_obs
    diffs = np.vstack([trace.gs[:1], np.diff(trace.gs, axis=0)])
    variation_term = float(np.sum(trace.etas * np.sum(diffs**2, axis=1)))
    stability_term = 0.5 * float(
        np.sum(np.sum((trace.xs - anchors[1:]) ** 2, axis=1) / trace.etas)
    )
    eta_last = float(trace.etas[-1])
    return (D * D + 2.0 * B_f) / (2.0 * eta_last) + variation_term - stability_term


def og_game_bound(D, B_f, G, L, n, T, eta):
    """(D^2 + 2 B_f) / eta + 2 eta G^2 + 3 n L^2 G^2 eta^3 T.

    Individual regret of one optimistic player when all n players use the
    same fixed eta in a G-Lipschitz, L-smooth concave-utility game.
    """
    return (D * D + 2.0 * B_f) / eta + 2.0 * eta * G * G + 3.0 * n * L * L * G * G * eta**3 * T


def og_game_bound_tuned(D, B_f, G, L, n, T):
    """(D^2 + 2 B_f + 4 n L^2 G^2) T^{1/4}, the eta = T^{-1/4} instantiation."""
    return (D * D + 2.0 * B_f + 4.0 * n * L * L * G * G) * float(T) ** 0.25


def social_eta_max(alpha, n, L):
    """Largest admissible fixed step size sqrt(min(alpha, 1) / (8 n L^2))."""
    if alpha <= 0 or n < 1 or L <= 0:
        raise ValueError("need alpha > 0, n >= 1, L > 0")
    return float(np.sqrt(min(alpha, 1.0) / (8.0 * n * L * L)))


def social_bound(diameters, spreads, G, eta, alpha, L, n=None):
    """sum_i (D_i + B_{f_i}) / (2 eta) + n eta G^2 for admissible eta.

    Sum of all players' regrets against alpha-strongly convex comparators
    under all-optimistic play; the admissibility condition
    eta <= sqrt(min(alpha, 1) / (8 n L^2)) is enforced, not clamped.
    """
    diameters = np.asarray(diameters, dtype=float)
    spreads = np.asarray(spreads, dtype=float)
    if diameters.shape != spreads.shape:
        raise ValueError("need one diameter and one spread per player")
    n = len(diameters) if n is None else int(n)
    limit = social_eta_max(alpha, n, L)
    if eta > limit + 1e-12:
        raise StepSizeError(
            f"step size violates social-regret condition: eta={eta} > {limit}"
        )
    return float(np.sum(diameters + spreads)) / (2.0 * eta) + n * eta * G * G


def md_bound(trace, report, mirror, rho=0.0, constant_form=False):
    """Mirror-descent regret bound in the map's geometry.

        (D + B_f) / eta_T + sum_t (eta_t / 2) ||g^t||_*^2
            - ((1 - rho) / 2) sum_{t<T} ||p^t - p^{t+1}||^2

    with D = max_t D(p^t | x^t) the largest divergence along the prox path,
    dual-norm gradient terms, and prox steps measured in the primal norm.
    ``constant_form=True`` uses D = D(p^1 | x^1) and B_f = f(p^1) - f(p^T).
    The report must carry a prox path taken in the same mirror geometry.
    """
    eta_last = float(trace.etas[-1])
    ps = report.prox_path
    if constant_form:
        D = float(brg.bregman_div(mirror, ps[0], trace.xs[0]))
        B_f = float(report.fvals[0] - report.fvals[-1])
    else:
        D = float(np.max(brg.bregman_div_rows(mirror, ps, trace.xs)))
        B_f = report.Bf_obs
    dual_sq = mirror.dual_norm_rows(trace.gs) ** 2
    grad_term = 0.5 * float(np.sum(trace.etas * dual_sq))
    if len(ps) > 1:
        path_sq = float(np.sum(mirror.primal_norm_rows(np.diff(ps, axis=0)) ** 2))
    else:
        path_sq = 0.0
    return (D + B_f) / eta_last + grad_term - 0.5 * (1.0 - rho) * path_sq
