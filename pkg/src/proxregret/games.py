"""Smooth concave-utility games, self-play, and equilibrium-gap certificates.

Games are represented by per-player feasible sets, a utility-gradient oracle,
and certified constants G (gradient norms) and L (joint smoothness). Built-in
kinds compute both constants analytically; user-supplied oracles declare them
and are spot-checked during play.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import regret as rg
from .errors import ConstantsViolated
from .geometry import ConvexSet, simplex
from .regret import Trace


@dataclass
class SmoothConvexGame:
    """n-player game: ``grad_fn(i, profile)`` returns grad_{x_i} u_i(profile)."""

    sets: Sequence[ConvexSet]
    grad_fn: Callable
    grad_bound: float
    smoothness: float
    kind: str = "custom"

    @property
    def n(self):
        return len(self.sets)


@dataclass
class PlayRecord:
    """Per-player traces of one self-play run, round-aligned."""

    traces: list

    @property
    def T(self):
        return self.traces[0].T

    @property
    def n(self):
        return len(self.traces)


def _set_radius(s):
    """sup ||x|| over the set (used for analytic gradient bounds)."""
    if s.kind == "simplex":
        verts = s.extreme_points()
        return float(np.max(np.linalg.norm(verts, axis=1)))
    if s.kind == "box":
        corner = np.maximum(np.abs(s.lo), np.abs(s.hi))
        return float(np.linalg.norm(corner))
    if s.kind == "ball":
        return float(np.linalg.norm(s.center) + s.radius)
    raise ValueError("games require bounded strategy sets")


def _max_image_norm(M, s):
    """sup_{x in set} ||M x||, exact on polyhedra with few vertices."""
    verts = s.extreme_points()
    if verts is not None and len(verts) <= 4096:
        return float(np.max(np.linalg.norm(verts @ M.T, axis=1)))
    return float(np.linalg.norm(M, 2)) * _set_radius(s)


def bilinear_zero_sum(M, sets=None):
    """Two-player zero-sum game u_1 = x_1^T M x_2 = -u_2.

    Default strategy sets are probability simplices matching M's shape;
    G is the exact max gradient norm over the sets and L = ||M||_2.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("M must be a matrix")
    d1, d2 = M.shape
    if sets is None:
        sets = [simplex(d1), simplex(d2)]
    if sets[0].dim != d1 or sets[1].dim != d2:
        raise ValueError("strategy sets do not match the payoff matrix")

    def grad_fn(i, xs):
        if i == 0:
            return M @ xs[1]
        return -M.T @ xs[0]

    G = max(_max_image_norm(M, sets[1]), _max_image_norm(M.T, sets[0]))
    L = float(np.linalg.norm(M, 2))
    return SmoothConvexGame(list(sets), grad_fn, G, L, kind="bilinear-zero-sum")


def matching_pennies(scale=1.0):
    return bilinear_zero_sum(scale * np.array([[1.0, -1.0], [-1.0, 1.0]]))


def quadratic_polymatrix(couplings, curvatures=None, offsets=None, sets=None):
    """u_i = c_i^T x_i + sum_{j != i} x_i^T M_ij x_j - (1/2) x_i^T S_i x_i.

    ``couplings`` maps ordered pairs (i, j) to M_ij; ``curvatures`` are PSD
    self-terms S_i (concavity certificates); ``offsets`` the linear terms c_i.
    """
    if sets is None:
        raise ValueError("quadratic polymatrix games need explicit strategy sets")
    n = len(sets)
    dims = [s.dim for s in sets]
    mats = {}
    for (i, j), M in couplings.items():
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ValueError(f"coupling ({i},{j}) must link two distinct players")
        M = np.asarray(M, dtype=float)
        if M.shape != (dims[i], dims[j]):
            raise ValueError(f"coupling ({i},{j}) has shape {M.shape}, expected {(dims[i], dims[j])}")
        mats[(i, j)] = M
    curvatures = curvatures or {}
    selfs = {}
    for i, S in curvatures.items():
        S = np.asarray(S, dtype=float)
        if np.min(np.linalg.eigvalsh(S)) < -1e-9:
            raise ValueError(f"self-term for player {i} must be positive semidefinite")
        selfs[i] = S
    offsets = offsets or {}
    lins = {i: np.asarray(c, dtype=float) for i, c in offsets.items()}

    def grad_fn(i, xs):
        g = lins.get(i, np.zeros(dims[i])).copy()
        for j in range(n):
            if (i, j) in mats:
                g += mats[(i, j)] @ xs[j]
        if i in selfs:
            g -= selfs[i] @ xs[i]
        return g

    radii = [_set_radius(s) for s in sets]
    G = 0.0
    L_sq = 0.0
    for i in range(n):
        gi = float(np.linalg.norm(lins.get(i, np.zeros(dims[i]))))
        li_sq = 0.0
        for j in range(n):
            if (i, j) in mats:
                op = float(np.linalg.norm(mats[(i, j)], 2))
                gi += op * radii[j]
                li_sq += op * op
        if i in selfs:
            op = float(np.linalg.norm(selfs[i], 2))
            gi += op * radii[i]
            li_sq += op * op
        G = max(G, gi)
        L_sq = max(L_sq, li_sq)
    return SmoothConvexGame(list(sets), grad_fn, G, float(np.sqrt(L_sq)), kind="quadratic-polymatrix")


def _tensor_grad(U, xs, i):
    out = np.asarray(U, dtype=float)
    for j in range(len(xs) - 1, -1, -1):
        if j == i:
            continue
        out = np.tensordot(out, xs[j], axes=(j, 0))
    return out


def normal_form(tensors, sets=None):
    """Multilinear game from per-player payoff tensors on simplices.

    ``tensors[i]`` has one axis per player; u_i is its multilinear extension.
    G and L come from exact maxima over pure-strategy slices.
    """
    tensors = [np.asarray(U, dtype=float) for U in tensors]
    n = len(tensors)
    dims = tensors[0].shape
    if len(dims) != n or any(U.shape != dims for U in tensors):
        raise ValueError("each payoff tensor needs one axis per player, all shapes equal")
    if sets is None:
        sets = [simplex(d) for d in dims]

    def grad_fn(i, xs):
        return _tensor_grad(tensors[i], xs, i)

    G = 0.0
    for i, U in enumerate(tensors):
        flat = np.moveaxis(U, i, 0).reshape(dims[i], -1)
        G = max(G, float(np.max(np.linalg.norm(flat, axis=0))))
    L = 0.0
    for i, U in enumerate(tensors):
        li_sq = 0.0
        for j in range(n):
            if j == i:
                continue
            slices = np.moveaxis(U, (i, j), (0, 1)).reshape(dims[i], dims[j], -1)
            lij = max(
                float(np.linalg.norm(slices[:, :, k], 2)) for k in range(slices.shape[2])
            )
            li_sq += lij * lij
        L = max(L, float(np.sqrt(li_sq)))
    return SmoothConvexGame(list(sets), grad_fn, G, L, kind="normal-form")


def first_price_auction(values, grids):
    """Normal-form first-price auction: highest bid wins, ties split evenly.

    ``values[i]`` is bidder i's valuation, ``grids[i]`` the discrete bid grid
    spanned by the i-th simplex.
    """
    grids = [np.asarray(g, dtype=float) for g in grids]
    n = len(values)
    dims = tuple(len(g) for g in grids)
    tensors = [np.zeros(dims) for _ in range(n)]
    for idx in np.ndindex(dims):
        bids = np.array([grids[i][idx[i]] for i in range(n)])
        top = bids.max()
        winners = np.flatnonzero(bids == top)
        share = 1.0 / len(winners)
        for i in winners:
            tensors[i][idx] = (values[i] - top) * share
    return normal_form(tensors)


def self_play(game, learners, T, grad_tol=1e-7):
    """Simultaneous self-play for T rounds.

    Every player's action is computed before any feedback is revealed; the
    feedback to player i is the loss gradient -grad_{x_i} u_i(x^t). Gradient
    norms are checked against the game's declared bound.
    """
    if len(learners) != game.n:
        raise ValueError(f"game has {game.n} players, got {len(learners)} learners")
    for s, lrn in zip(game.sets, learners):
        if lrn.set.dim != s.dim:
            raise ValueError("learner set dimension does not match the game")
    xs_hist = [np.empty((T, s.dim)) for s in game.sets]
    gs_hist = [np.empty((T, s.dim)) for s in game.sets]
    etas_hist = [np.empty(T) for _ in game.sets]
    anchor_hist = [
        [lrn.anchor.copy()] if hasattr(lrn, "anchor") else None for lrn in learners
    ]
    for t_idx in range(T):
        profile = [lrn.predict() for lrn in learners]
        feedback = []
        for i in range(game.n):
            g = -np.asarray(game.grad_fn(i, profile), dtype=float)
            gnorm = float(np.linalg.norm(g))
            if gnorm > game.grad_bound + grad_tol:
                raise ConstantsViolated(
                    f"constants violated: ||g||={gnorm} exceeds G={game.grad_bound}",
                    i, t_idx + 1, g,
                )
            feedback.append(g)
        for i, lrn in enumerate(learners):
            etas_hist[i][t_idx] = lrn.schedule.eta(lrn.t)
            lrn.update(feedback[i])
            xs_hist[i][t_idx] = profile[i]
            gs_hist[i][t_idx] = feedback[i]
            if anchor_hist[i] is not None:
                anchor_hist[i].append(lrn.anchor.copy())
    traces = [
        Trace(
            game.sets[i],
            xs_hist[i],
            gs_hist[i],
            etas_hist[i],
            anchors=np.array(anchor_hist[i]) if anchor_hist[i] is not None else None,
        )
        for i in range(game.n)
    ]
    return PlayRecord(traces)


def social_regret(record, comparators, **kwargs):
    """Sum over players of linearized proximal regret against f_i."""
    if len(comparators) != record.n:
        raise ValueError("need one comparator per player")
    return float(
        sum(rg.proximal_regret(tr, f, **kwargs).regret for tr, f in zip(record.traces, comparators))
    )


def pce_gap(record, families):
    """Certified equilibrium gap of the empirical play distribution.

    ``families`` is one comparator family shared by all players or a
    per-player list. Returns (epsilon, worst player, worst comparator id)
    where epsilon = max_i family_regret_i / T.
    """
    if isinstance(families, (list, tuple)) and len(families) == record.n and not all(
        hasattr(f, "kind") for f in families
    ):
        per_player = families
    else:
        per_player = [families] * record.n
    eps, worst_player, worst_label = -np.inf, -1, ""
    for i, tr in enumerate(record.traces):
        best, _ = rg.family_regret(tr, per_player[i])
        value = best.regret / tr.T
        if value > eps:
            eps, worst_player, worst_label = value, i, best.comparator_id
    return float(eps), worst_player, worst_label


def validate_constants(game, seed=0, samples=200, tol=1e-9):
    """Spot-check the declared G and L on sampled profiles.

    Built-in kinds certify their constants analytically; this is the sampled
    check for user-declared oracles. Raises :class:`ConstantsViolated` with
    the offending player and a witness profile.
    """
    rng = np.random.default_rng(seed)
    draws = [s.sample(rng, 2 * samples) for s in game.sets]
    for k in range(samples):
        profile = [d[k] for d in draws]
        other = [d[samples + k] for d in draws]
        dist = float(np.sqrt(sum(np.sum((p - q) ** 2) for p, q in zip(profile, other))))
        for i in range(game.n):
            g = np.asarray(game.grad_fn(i, profile), dtype=float)
            if float(np.linalg.norm(g)) > game.grad_bound + tol:
                raise ConstantsViolated(
                    f"gradient bound violated: ||grad_{i}|| = {np.linalg.norm(g)} "
                    f"exceeds G = {game.grad_bound}", i, k + 1, profile,
                )
            g2 = np.asarray(game.grad_fn(i, other), dtype=float)
            if float(np.linalg.norm(g - g2)) > game.smoothness * dist + tol:
                raise ConstantsViolated(
                    f"smoothness violated for player {i}: gradient step "
                    f"{np.linalg.norm(g - g2)} over profile distance {dist} "
                    f"exceeds L = {game.smoothness}", i, k + 1, profile,
                )


def variation_terms(trace):
    """Per-round squared feedback variation ||g^t - g^{t-1}||^2 with g^0 = 0."""
    diffs = np.vstack([trace.gs[:1], np.diff(trace.gs, axis=0)])
    return np.sum(diffs**2, axis=1)


def gradient_variation(record, player):
    """Total feedback variation sum_t ||g^t - g^{t-1}||^2 for one player."""
    return float(np.sum(variation_terms(record.traces[player])))
