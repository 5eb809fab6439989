"""Deterministic loss oracles used as adversarial fixtures.

Each oracle is callable as ``oracle(t, x) -> g`` and, where a natural convex
loss exists, also exposes ``loss(t, x)`` with ``g`` a subgradient at x.
Random streams are drawn lazily and cached per round, so a given seed yields
the same sequence regardless of access pattern.
"""

from __future__ import annotations

import numpy as np


class IIDLinearAdversary:
    """Linear losses <g^t, x> with i.i.d. directions normalized to ||g|| = G."""

    def __init__(self, dim, seed, grad_bound=1.0):
        self.dim = int(dim)
        self.grad_bound = float(grad_bound)
        self._rng = np.random.default_rng(seed)
        self._grads = []

    def _grad(self, t):
        while len(self._grads) < t:
            u = self._rng.normal(size=self.dim)
            u /= max(np.linalg.norm(u), 1e-300)
            self._grads.append(self.grad_bound * u)
        return self._grads[t - 1]

    def __call__(self, t, x):
        return self._grad(t).copy()

    def loss(self, t, x):
        return float(self._grad(t) @ np.asarray(x, dtype=float))


class AlternatingSignAdversary:
    """g^t = (-1)^t G u along a fixed direction (u = e_1 unless seeded)."""

    def __init__(self, dim, seed=None, grad_bound=1.0):
        self.dim = int(dim)
        self.grad_bound = float(grad_bound)
        if seed is None or dim == 1:
            u = np.zeros(self.dim)
            u[0] = 1.0
        else:
            u = np.random.default_rng(seed).normal(size=self.dim)
            u /= np.linalg.norm(u)
        self.direction = u

    def __call__(self, t, x):
        return ((-1.0) ** t) * self.grad_bound * self.direction

    def loss(self, t, x):
        return float(self(t, x) @ np.asarray(x, dtype=float))


class PinballAdversary:
    """One-dimensional quantile-tracking losses against a random score stream.

    loss(x) = (x - s^t)(q - 1{x < s^t}), so the subgradient is q - 1 when the
    play undershoots the score and q otherwise.
    """

    def __init__(self, seed, quantile=0.9, scores=None):
        if not 0.0 < quantile < 1.0:
            raise ValueError("quantile must be in (0, 1)")
        self.quantile = float(quantile)
        self._rng = np.random.default_rng(seed)
        self._scores = list(np.asarray(scores, dtype=float)) if scores is not None else []
        self._fixed = scores is not None

    def score(self, t):
        while len(self._scores) < t:
            if self._fixed:
                raise ValueError(f"score stream exhausted at round {t}")
            self._scores.append(float(self._rng.normal()))
        return self._scores[t - 1]

    def __call__(self, t, x):
        x = float(np.asarray(x).reshape(()))
        g = self.quantile - 1.0 if x < self.score(t) else self.quantile
        return np.array([g])

    def loss(self, t, x):
        x = float(np.asarray(x).reshape(()))
        s = self.score(t)
        return (x - s) * (self.quantile - (1.0 if x < s else 0.0))


class WorstCaseExternalAdversary:
    """g^t = G sign(x^t) with sign(0) = +1; loss is the scaled l1 norm.

    Against any gradient method this keeps |x^t| near the step size, forcing
    external regret on the order of sqrt(T) in one dimension.
    """

    def __init__(self, dim=1, grad_bound=1.0):
        self.dim = int(dim)
        self.grad_bound = float(grad_bound)

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        signs = np.where(x >= 0.0, 1.0, -1.0)
        return self.grad_bound * signs

    def loss(self, t, x):
        return self.grad_bound * float(np.sum(np.abs(np.asarray(x, dtype=float))))


def make_adversary(kind, dim, seed, grad_bound=1.0, quantile=0.9, scores=None):
    if kind == "iid-linear":
        return IIDLinearAdversary(dim, seed, grad_bound=grad_bound)
    if kind == "alternating-sign":
        return AlternatingSignAdversary(dim, seed, grad_bound=grad_bound)
    if kind == "pinball":
        if dim != 1:
            raise ValueError("pinball adversary is one-dimensional")
        return PinballAdversary(seed, quantile=quantile, scores=scores)
    if kind == "worst-case-external":
        return WorstCaseExternalAdversary(dim, grad_bound=grad_bound)
    raise ValueError(f"unknown adversary kind {kind!r}")
