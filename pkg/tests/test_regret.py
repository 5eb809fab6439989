import numpy as np
import pytest

import proxregret as pr
from proxregret import comparators as cmp
from proxregret.errors import NotAnEndomorphism, UnboundedSetError

from conftest import gd_run, standard_sets


def manual_trace(s, xs, gs, eta=0.1):
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    gs = np.atleast_2d(np.asarray(gs, dtype=float))
    return pr.Trace(s, xs, gs, np.full(len(xs), eta))


class TestProximalRegret:
    def test_constant_comparator_zero_exactly(self):
        trace, _ = gd_run(pr.simplex(3), seed=1, T=100)
        rep = pr.proximal_regret(trace, pr.constant(3))
        assert rep.regret == 0.0

    def test_indicator_point_equals_external_at_point(self):
        trace, _ = gd_run(pr.simplex(3), seed=2, T=120)
        target = np.array([0.1, 0.4, 0.5])
        rep = pr.proximal_regret(trace, pr.indicator_point(target))
        direct = float(np.sum(trace.gs * (trace.xs - target)))
        assert rep.regret == pytest.approx(direct, abs=1e-12)
        assert rep.Bf_obs == 0.0

    def test_one_round_linear_example(self):
        trace = manual_trace(pr.whole_space(2), [[1.0, 0.0]], [[1.0, 0.0]])
        rep = pr.proximal_regret(trace, pr.linear([1.0, 0.0]))
        assert np.allclose(rep.prox_path[0], [0.0, 0.0])
        assert rep.regret == pytest.approx(1.0)

    def test_report_observables(self):
        trace, _ = gd_run(pr.ball(np.zeros(2), 1.0), seed=3, T=50)
        f = pr.linear([1.0, 0.0])
        rep = pr.proximal_regret(trace, f)
        ps = cmp.prox_rows(f, trace.set, trace.xs)
        assert rep.D_obs == pytest.approx(np.max(np.linalg.norm(trace.xs - ps, axis=1)))
        fv = ps @ f.direction
        assert rep.Bf_obs == pytest.approx(fv.max() - fv.min())
        assert rep.path_sq == pytest.approx(np.sum(np.diff(ps, axis=0) ** 2))


class TestFamilyRegret:
    def test_constant_family_zero(self):
        trace, _ = gd_run(pr.simplex(2), seed=4, T=60)
        best, reports = pr.family_regret(trace, [pr.constant(2)])
        assert best.regret == 0.0 and len(reports) == 1

    def test_vertex_indicators_equal_external_regret(self):
        for s in (pr.simplex(4), pr.box(-np.ones(3), np.ones(3))):
            trace, _ = gd_run(s, seed=5, T=150)
            best, _ = pr.family_regret(trace, cmp.vertex_indicators(s))
            assert best.regret == pytest.approx(pr.external_regret(trace), abs=1e-9)

    def test_unconstrained_unit_linear_family_exact_maximizer(self, rng):
        trace, _ = gd_run(pr.whole_space(3), seed=6, T=80)
        best, _ = pr.family_regret(trace, pr.unit_linear_family())
        gbar = trace.gs.mean(axis=0)
        assert best.regret == pytest.approx(trace.T * np.linalg.norm(gbar), abs=1e-9)
        # sampled directions never beat the exact maximizer
        sampled = cmp.unit_linear_directions(3, 2000, rng)
        worst = max(pr.proximal_regret(trace, f).regret for f in sampled)
        assert worst <= best.regret + 1e-9

    def test_empty_family_rejected(self):
        trace, _ = gd_run(pr.simplex(2), seed=7, T=10)
        with pytest.raises(ValueError):
            pr.family_regret(trace, [])

    def test_nonnegativity_with_constant_member(self, rng):
        for kind, s in standard_sets(3).items():
            trace, _ = gd_run(s, seed=8, T=90)
            fam = [pr.constant(3)] + cmp.point_indicators(s, 3, rng)
            best, _ = pr.family_regret(trace, fam)
            assert best.regret >= 0.0, kind


class TestExternalRegret:
    def test_zero_gradients(self):
        trace = manual_trace(pr.simplex(2), [[0.5, 0.5]] * 3, [[0.0, 0.0]] * 3)
        assert pr.external_regret(trace) == 0.0

    def test_single_round_simplex(self):
        trace = manual_trace(pr.simplex(2), [[0.5, 0.5]], [[1.0, 0.0]])
        assert pr.external_regret(trace) == pytest.approx(0.5)

    def test_box_coordinatewise_matches_vertex_enumeration(self):
        s = pr.box(np.array([-1.0, 0.0, -2.0]), np.array([1.0, 2.0, 0.5]))
        trace, _ = gd_run(s, seed=20, T=60)
        verts = s.extreme_points()
        gsum = trace.gs.sum(axis=0)
        brute = float(np.sum(trace.gs * trace.xs)) - float(np.min(verts @ gsum))
        assert pr.external_regret(trace) == pytest.approx(brute, abs=1e-10)

    def test_high_dimensional_box_stays_exact(self):
        # corner enumeration is impossible at d = 40; the separable form is not
        s = pr.box(-np.ones(40), np.ones(40))
        trace, _ = gd_run(s, seed=21, T=40)
        gsum = trace.gs.sum(axis=0)
        best = np.where(gsum >= 0, s.lo, s.hi)
        direct = float(np.sum(trace.gs * trace.xs)) - float(best @ gsum)
        assert pr.external_regret(trace) == pytest.approx(direct, abs=1e-9)

    def test_ball_closed_form(self, rng):
        s = pr.ball(np.zeros(3), 2.0)
        trace, _ = gd_run(s, seed=9, T=70)
        gsum = trace.gs.sum(axis=0)
        played = float(np.sum(trace.gs * trace.xs))
        expect = played + 2.0 * np.linalg.norm(gsum)
        assert pr.external_regret(trace) == pytest.approx(expect, abs=1e-9)

    def test_unbounded_needs_radius(self):
        trace = manual_trace(pr.whole_space(1), [[0.0]], [[1.0]])
        with pytest.raises(UnboundedSetError):
            pr.external_regret(trace)
        assert pr.external_regret(trace, comparator_radius=1.0) == pytest.approx(1.0)


class TestGradientEquilibrium:
    def test_cancellation(self):
        trace = manual_trace(pr.whole_space(1), [[0.0], [0.0]], [[1.0], [-1.0]])
        assert pr.gradient_equilibrium_norm(trace) == 0.0

    def test_constant_direction(self):
        trace = manual_trace(pr.whole_space(2), [[0.0, 0.0]] * 10, [[1.0, 0.0]] * 10)
        assert pr.gradient_equilibrium_norm(trace) == 1.0

    def test_identity_with_unit_linear_family(self):
        trace, _ = gd_run(pr.whole_space(2), seed=10, T=200)
        best, _ = pr.family_regret(trace, pr.unit_linear_family())
        assert trace.T * pr.gradient_equilibrium_norm(trace) == pytest.approx(
            best.regret, abs=1e-9
        )

    def test_empty_trace_rejected(self):
        trace = pr.Trace(pr.whole_space(1), np.zeros((0, 1)), np.zeros((0, 1)), np.zeros(0))
        with pytest.raises(ValueError):
            pr.gradient_equilibrium_norm(trace)


class TestSwapRegret:
    def test_identity_map_zero(self):
        trace, _ = gd_run(pr.simplex(3), seed=11, T=50)
        assert pr.symmetric_linear_swap_regret(trace, np.eye(3)) == 0.0

    def test_constant_map_equals_external_at_point(self):
        trace, _ = gd_run(pr.simplex(3), seed=12, T=50)
        target = np.array([0.2, 0.3, 0.5])
        got = pr.symmetric_linear_swap_regret(trace, np.zeros((3, 3)), target)
        direct = float(np.sum(trace.gs * (trace.xs - target)))
        assert got == pytest.approx(direct, abs=1e-12)

    def test_interpolation_identity(self, rng):
        trace, _ = gd_run(pr.simplex(4), seed=13, T=100)
        for A, b in cmp.symmetric_endomorphisms(trace.set, 5, rng):
            base = pr.symmetric_linear_swap_regret(trace, A, b)
            for alpha in (0.1, 0.5, pr.contraction_weight(A), 1.0):
                A_a, b_a = pr.interpolate_endomorphism(A, b, alpha)
                blended = pr.symmetric_linear_swap_regret(trace, A_a, b_a)
                assert alpha * base == pytest.approx(blended, abs=1e-8)

    def test_non_endomorphism_witnessed(self):
        trace, _ = gd_run(pr.simplex(2), seed=14, T=20)
        with pytest.raises(NotAnEndomorphism) as err:
            pr.symmetric_linear_swap_regret(trace, 2.0 * np.eye(2))
        assert err.value.round_index >= 1

    def test_asymmetric_rejected(self):
        trace, _ = gd_run(pr.simplex(2), seed=15, T=10)
        with pytest.raises(ValueError, match="symmetric"):
            pr.symmetric_linear_swap_regret(trace, np.array([[1.0, 0.5], [0.0, 0.5]]))


class TestLinearizationDominance:
    def test_pinball_losses(self, rng):
        # with explicit convex losses, the true-loss gap never exceeds the
        # linearized regret
        s = pr.whole_space(1)
        oracle = pr.adversaries.make_adversary("pinball", 1, seed=21, quantile=0.7)
        trace = pr.run(pr.GradientDescent(s, pr.inv_sqrt_schedule()), oracle, 500)
        for f in [pr.linear([1.0]), pr.linear([-0.4]), pr.indicator_point([0.3])]:
            rep = pr.proximal_regret(trace, f)
            true_gap = sum(
                oracle.loss(t + 1, trace.xs[t, 0]) - oracle.loss(t + 1, rep.prox_path[t, 0])
                for t in range(trace.T)
            )
            assert true_gap <= rep.regret + 1e-8

    def test_linear_losses_tight(self):
        s = pr.simplex(3)
        oracle = pr.adversaries.make_adversary("iid-linear", 3, seed=22)
        trace = pr.run(pr.GradientDescent(s, pr.inv_sqrt_schedule()), oracle, 200)
        f = pr.indicator_point(np.array([0.3, 0.3, 0.4]))
        rep = pr.proximal_regret(trace, f)
        true_gap = sum(
            oracle.loss(t + 1, trace.xs[t]) - oracle.loss(t + 1, rep.prox_path[t])
            for t in range(trace.T)
        )
        assert true_gap == pytest.approx(rep.regret, abs=1e-9)


class TestBregmanRegret:
    def test_entropy_report_uses_divergence(self):
        m = pr.entropy_map(pr.simplex(3))
        adv = pr.adversaries.make_adversary("iid-linear", 3, seed=23)
        trace = pr.run(pr.MirrorDescent(m, pr.inv_sqrt_schedule()), adv, 100)
        f = pr.linear([0.5, -0.5, 0.0])
        rep = pr.bregman_proximal_regret(trace, f, m)
        ps = rep.prox_path
        from proxregret.bregman import bregman_div_rows

        assert rep.D_obs == pytest.approx(float(np.max(bregman_div_rows(m, ps, trace.xs))))
        l1_steps = np.abs(np.diff(ps, axis=0)).sum(axis=1)
        assert rep.path_sq == pytest.approx(float(np.sum(l1_steps**2)))
