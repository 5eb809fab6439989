"""Online learners: projected gradient descent, its optimistic variant, and
mirror descent, as single-step state machines with non-increasing schedules.

All learners follow a two-phase round protocol: ``predict()`` returns the
point to play, ``update(g)`` consumes the feedback vector. ``run`` drives the
protocol against a loss oracle and returns the trace. Learner state is
single-owner and mutable; independent runs parallelize freely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bregman as brg
from .errors import ProtocolError
from .geometry import as_vector
from .regret import Trace


@dataclass(frozen=True)
class StepSchedule:
    """Non-increasing step sizes: constant eta or eta0 / sqrt(t)."""

    kind: str
    eta0: float

    def __post_init__(self):
        if self.kind not in ("constant", "inv-sqrt"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.eta0 <= 0:
            raise ValueError("step size must be positive")

    def eta(self, t):
        if t < 1:
            raise ValueError("rounds are 1-based")
        if self.kind == "constant":
            return self.eta0
        return self.eta0 / np.sqrt(t)

    @property
    def is_constant(self):
        return self.kind == "constant"


def constant_schedule(eta):
    return StepSchedule("constant", float(eta))


def inv_sqrt_schedule(eta0=1.0):
    return StepSchedule("inv-sqrt", float(eta0))


def optimized_schedule(D, B_f, G, T):
    """Fixed eta = sqrt((D^2 + 2 B_f) / (G^2 T)), tuned to known constants."""
    if G <= 0 or T < 1:
        raise ValueError("optimized schedule needs G > 0 and T >= 1")
    return constant_schedule(np.sqrt((D * D + 2.0 * B_f) / (G * G * T)))


class _TwoPhase:
    """Shared predict/update bookkeeping. Rounds are 1-based."""

    def __init__(self):
        self.t = 1
        self._awaiting_update = False

    def _mark_predict(self):
        if self._awaiting_update:
            raise ProtocolError("predict called twice without an update")
        self._awaiting_update = True

    def _mark_update(self):
        if not self._awaiting_update:
            raise ProtocolError("update called before predict")
        self._awaiting_update = False
        self.t += 1


class GradientDescent(_TwoPhase):
    """x^{t+1} = project(x^t - eta_t g^t)."""

    def __init__(self, feasible_set, schedule, x0=None):
        super().__init__()
        self.set = feasible_set
        self.schedule = schedule
        start = feasible_set.analytic_center() if x0 is None else as_vector(x0, feasible_set.dim)
        self.x = feasible_set.project(start)

    def predict(self):
        self._mark_predict()
        return self.x.copy()

    def update(self, g):
        g = as_vector(g, self.set.dim, name="g")
        self.x = self.set.project(self.x - self.schedule.eta(self.t) * g)
        self._mark_update()


class OptimisticGradientDescent(_TwoPhase):
    """Anchor sequence w^t with optimistic plays.

    Plays x^t = project(w^{t-1} - eta_t g^{t-1}) using the previous feedback
    (g^0 = 0), then re-anchors w^t = project(w^{t-1} - eta_t g^t).
    """

    def __init__(self, feasible_set, schedule, w0=None):
        super().__init__()
        self.set = feasible_set
        self.schedule = schedule
        start = feasible_set.analytic_center() if w0 is None else as_vector(w0, feasible_set.dim)
        self.anchor = feasible_set.project(start)
        self.g_prev = np.zeros(feasible_set.dim)
        self.x = self.anchor.copy()

    def predict(self):
        self._mark_predict()
        self.x = self.set.project(self.anchor - self.schedule.eta(self.t) * self.g_prev)
        return self.x.copy()

    def update(self, g):
        g = as_vector(g, self.set.dim, name="g")
        self.anchor = self.set.project(self.anchor - self.schedule.eta(self.t) * g)
        self.g_prev = g.copy()
        self._mark_update()


class MirrorDescent(_TwoPhase):
    """x^{t+1} = argmin_y { eta_t <g^t, y> + D(y | x^t) } for the mirror map."""

    def __init__(self, mirror, schedule, x0=None):
        super().__init__()
        self.mirror = mirror
        self.set = mirror.domain
        self.schedule = schedule
        start = self.set.analytic_center() if x0 is None else as_vector(x0, self.set.dim)
        self.x = self.set.project(start)

    def predict(self):
        self._mark_predict()
        return self.x.copy()

    def update(self, g):
        g = as_vector(g, self.set.dim, name="g")
        self.x = brg.md_argmin(self.mirror, self.x, g, self.schedule.eta(self.t))
        self._mark_update()


def run(learner, loss_oracle, T):
    """Drive the online protocol for T rounds and record the trace.

    ``loss_oracle(t, x)`` returns the feedback vector for round t. Optimistic
    learners additionally record their anchor sequence w^0 .. w^T.
    """
    if T < 0:
        raise ValueError("T must be non-negative")
    d = learner.set.dim
    xs = np.empty((T, d))
    gs = np.empty((T, d))
    etas = np.empty(T)
    track_anchors = isinstance(learner, OptimisticGradientDescent)
    anchors = [learner.anchor.copy()] if track_anchors else None
    for i in range(T):
        t = learner.t
        x = learner.predict()
        g = as_vector(loss_oracle(t, x), d, name="g")
        etas[i] = learner.schedule.eta(t)
        learner.update(g)
        xs[i] = x
        gs[i] = g
        if track_anchors:
            anchors.append(learner.anchor.copy())
    return Trace(learner.set, xs, gs, etas, anchors=np.array(anchors) if track_anchors else None)
