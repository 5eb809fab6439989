import numpy as np
import pytest

import proxregret as pr


@pytest.fixture
def rng():
    return np.random.default_rng(0xA11CE)


def standard_sets(dim):
    return {
        "box": pr.box(-np.ones(dim), np.ones(dim)),
        "ball": pr.ball(np.zeros(dim), 1.0),
        "simplex": pr.simplex(dim),
    }


def gd_run(feasible_set, seed, T=400, schedule=None, adversary="iid-linear", **adv_kw):
    sched = schedule or pr.inv_sqrt_schedule()
    oracle = pr.adversaries.make_adversary(adversary, feasible_set.dim, seed, **adv_kw)
    return pr.run(pr.GradientDescent(feasible_set, sched), oracle, T), oracle


def og_run(feasible_set, seed, T=400, schedule=None, adversary="iid-linear", **adv_kw):
    sched = schedule or pr.constant_schedule(1.0 / np.sqrt(T))
    oracle = pr.adversaries.make_adversary(adversary, feasible_set.dim, seed, **adv_kw)
    return pr.run(pr.OptimisticGradientDescent(feasible_set, sched), oracle, T), oracle
