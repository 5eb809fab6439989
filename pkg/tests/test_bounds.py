import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import proxregret as pr
from proxregret import bounds as bnd
from proxregret.errors import StepSizeError

from conftest import gd_run, og_run


def zero_gradient_trace(s, T=5, eta=0.1, og=False):
    x0 = s.analytic_center()
    xs = np.tile(x0, (T, 1))
    gs = np.zeros_like(xs)
    anchors = np.tile(x0, (T + 1, 1)) if og else None
    return pr.Trace(s, xs, gs, np.full(T, eta), anchors=anchors)


class TestClosedFormValues:
    def test_gd_simple(self):
        assert bnd.gd_simple_bound(1.0, 0.0, 1.0, 100) == pytest.approx(20.0)
        assert bnd.gd_simple_bound(1.5, 0.3, 2.0, 1) == pytest.approx(1.5**2 + 0.3 + 4.0)

    def test_gd_optimized(self):
        assert bnd.gd_optimized_bound(1.0, 0.0, 1.0, 100) == pytest.approx(10.0)

    def test_symswap(self):
        assert bnd.symswap_bound(1.0, 1.0, 0.0, 1.0, 100) == pytest.approx(300.0)
        # the simplex instance 6 (4 + G^2) sqrt(T) coincides at D = 1, ||A|| <= 1
        assert bnd.symswap_bound(1.0, 1.0, 0.0, 1.0, 100) == pytest.approx(
            6.0 * (4.0 + 1.0) * 10.0
        )
        assert bnd.symswap_bound(0.5, 2.0, 1.0, 3.0, 1) == pytest.approx(
            3.0 * 1.5 * (16.0 + 2.0 + 9.0)
        )

    def test_og_game_bound(self):
        got = bnd.og_game_bound(D=1.0, B_f=0.0, G=1.0, L=1.0, n=2, T=16, eta=0.5)
        assert got == pytest.approx(15.0)  # 2 + 1 + 12
        assert bnd.og_game_bound(1.0, 0.0, 1.0, 1.0, 0, 16, 0.5) == pytest.approx(3.0)

    def test_og_game_bound_tuned(self):
        got = bnd.og_game_bound_tuned(D=1.0, B_f=0.5, G=2.0, L=1.0, n=3, T=256)
        assert got == pytest.approx((1.0 + 1.0 + 48.0) * 4.0)

    def test_social_eta_max(self):
        assert bnd.social_eta_max(1.0, 2, 1.0) == pytest.approx(0.25)

    def test_social_bound_value(self):
        got = bnd.social_bound([1.0, 1.0], [0.0, 0.0], G=1.0, eta=0.25, alpha=1.0, L=1.0)
        assert got == pytest.approx(4.5)

    def test_social_bound_is_t_free(self):
        import inspect

        assert "T" not in inspect.signature(bnd.social_bound).parameters

    def test_social_admissibility_enforced(self):
        with pytest.raises(StepSizeError):
            bnd.social_bound([1.0, 1.0], [0.0, 0.0], G=1.0, eta=0.3, alpha=1.0, L=1.0)


class TestGdFullBound:
    def test_zero_gradients_reduce_to_leading_term(self):
        s = pr.box(-np.ones(2), np.ones(2))
        trace = zero_gradient_trace(s, T=5, eta=0.1)
        f = pr.indicator_point([0.5, 0.5])
        rep = pr.proximal_regret(trace, f)
        D = np.linalg.norm(trace.xs[0] - np.array([0.5, 0.5]))
        assert bnd.gd_full_bound(trace, rep) == pytest.approx(D * D / (2 * 0.1))

    def test_constant_comparator_nonnegative_on_gd_traces(self):
        # with p^t = x^t the bound is sum (eta/2)||g||^2 - sum ||dx||^2/(2 eta) >= 0
        for seed in range(5):
            trace, _ = gd_run(pr.simplex(4), seed=seed, T=200,
                              schedule=pr.constant_schedule(0.05))
            rep = pr.proximal_regret(trace, pr.constant(4))
            assert bnd.gd_full_bound(trace, rep) >= -1e-12

    def test_indicator_drops_spread_term(self):
        trace, _ = gd_run(pr.simplex(3), seed=1, T=100)
        rep = pr.proximal_regret(trace, pr.indicator_point([0.2, 0.3, 0.5]))
        assert rep.Bf_obs == 0.0
        loose = bnd.gd_full_bound(trace, rep)
        tight = bnd.gd_full_bound(trace, rep, constant_form=False)
        assert loose == tight

    def test_constant_form_uses_first_round(self):
        trace, _ = gd_run(pr.simplex(3), seed=2, T=100,
                          schedule=pr.constant_schedule(0.1))
        f = pr.linear([0.4, -0.1, 0.0])
        rep = pr.proximal_regret(trace, f)
        got = bnd.gd_full_bound(trace, rep, constant_form=True)
        D1 = np.linalg.norm(trace.xs[0] - rep.prox_path[0])
        lead = (D1**2 + 2 * (rep.fvals[0] - rep.fvals[-1])) / (2 * 0.1)
        grad = 0.5 * float(np.sum(trace.etas * np.sum(trace.gs**2, axis=1)))
        path = 0.5 * float(np.sum(np.sum(np.diff(rep.prox_path, axis=0) ** 2, axis=1)
                                  / trace.etas[:-1]))
        assert got == pytest.approx(lead + grad - path)


class TestOgBound:
    def test_requires_anchors(self):
        trace, _ = gd_run(pr.simplex(2), seed=3, T=10)
        rep = pr.proximal_regret(trace, pr.constant(2))
        with pytest.raises(ValueError, match="OG trace"):
            bnd.og_adversarial_bound(trace, rep)

    def test_zero_gradients_reduce_to_leading_term(self):
        s = pr.box(-np.ones(2), np.ones(2))
        trace = zero_gradient_trace(s, T=4, eta=0.2, og=True)
        f = pr.indicator_point([0.4, -0.4])
        rep = pr.proximal_regret(trace, f)
        D = np.linalg.norm(trace.anchors[0] - np.array([0.4, -0.4]))
        assert bnd.og_adversarial_bound(trace, rep) == pytest.approx(D * D / (2 * 0.2))

    def test_constant_gradients_variation_collapses(self):
        s = pr.box([0.0], [1.0])
        g = np.array([0.5])
        lrn = pr.OptimisticGradientDescent(s, pr.constant_schedule(0.1), w0=[0.9])
        trace = pr.run(lrn, lambda t, x: g, 50)
        diffs = np.vstack([trace.gs[:1], np.diff(trace.gs, axis=0)])
        variation = float(np.sum(trace.etas * np.sum(diffs**2, axis=1)))
        assert variation == pytest.approx(0.1 * 0.25)  # eta_1 ||g^1||^2 only

    def test_variation_term_matches_trace_sum(self):
        trace, _ = og_run(pr.simplex(3), seed=4, T=60)
        from proxregret.games import variation_terms

        direct = float(np.sum(variation_terms(trace) * trace.etas))
        diffs = np.vstack([trace.gs[:1], np.diff(trace.gs, axis=0)])
        assert direct == pytest.approx(float(np.sum(trace.etas * np.sum(diffs**2, axis=1))))


class TestMdBound:
    def test_zero_gradients_reduce_to_leading_term(self):
        dom = pr.simplex(3)
        m = pr.entropy_map(dom)
        trace = zero_gradient_trace(dom, T=3, eta=0.5)
        f = pr.indicator_point([0.6, 0.2, 0.2])
        rep = pr.bregman_proximal_regret(trace, f, m)
        D = pr.bregman_div(m, np.array([0.6, 0.2, 0.2]), trace.xs[0])
        assert bnd.md_bound(trace, rep, m) == pytest.approx(D / 0.5)

    def test_euclidean_map_relates_to_gd_full_bound(self):
        # same leading and gradient terms; the path terms differ only by the
        # per-round 1/eta_t weighting
        dom = pr.ball(np.zeros(3), 1.0)
        m = pr.euclidean_map(dom)
        trace, _ = gd_run(dom, seed=5, T=80)
        f = pr.linear([0.3, -0.2, 0.1])
        rep = pr.bregman_proximal_regret(trace, f, m)
        md_val = bnd.md_bound(trace, rep, m, rho=f.rho)
        gd_val = bnd.gd_full_bound(trace, rep, rho=f.rho)
        steps_sq = np.sum(np.diff(rep.prox_path, axis=0) ** 2, axis=1)
        weight_gap = 0.5 * float(np.sum((1.0 / trace.etas[:-1] - 1.0) * steps_sq))
        assert md_val - gd_val == pytest.approx(weight_gap, abs=1e-9)

    def test_entropy_uses_max_norm_dual(self):
        dom = pr.simplex(2)
        m = pr.entropy_map(dom)
        xs = np.tile([0.5, 0.5], (2, 1))
        gs = np.array([[3.0, -1.0], [0.5, 2.0]])
        trace = pr.Trace(dom, xs, gs, np.array([0.5, 0.5]))
        rep = pr.bregman_proximal_regret(trace, pr.constant(2), m)
        got = bnd.md_bound(trace, rep, m)
        grad_term = 0.5 * (0.5 * 9.0 + 0.5 * 4.0)  # max-norm squared
        path = np.sum(np.abs(np.diff(rep.prox_path, axis=0)).sum(axis=1) ** 2)
        assert got == pytest.approx(0.0 / 0.5 + grad_term - 0.5 * path)


class TestShapeProperties:
    @given(
        d=st.floats(0, 5), b=st.floats(0, 5), g=st.floats(0, 5),
        t=st.integers(1, 10_000), bump=st.floats(0.01, 2.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_gd_simple_monotone(self, d, b, g, t, bump):
        base = bnd.gd_simple_bound(d, b, g, t)
        assert bnd.gd_simple_bound(d + bump, b, g, t) >= base
        assert bnd.gd_simple_bound(d, b + bump, g, t) >= base
        assert bnd.gd_simple_bound(d, b, g + bump, t) >= base
        assert bnd.gd_simple_bound(d, b, g, t + 1) >= base

    def test_tuned_game_bound_rate_vanishes(self):
        ratios = [
            bnd.og_game_bound_tuned(1.0, 0.5, 1.0, 2.0, 2, T) / T
            for T in (2**8, 2**10, 2**12)
        ]
        assert ratios[0] > ratios[1] > ratios[2]
