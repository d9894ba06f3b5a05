from math import factorial

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from microlocal.cli import cauchy_specs
from microlocal.cones import ConePatch, ConeSet, in_dual_region, member
from microlocal.counterexample import (
    HormanderParams,
    ball_lattice,
    build_terms,
    build_vm,
    cauchy_rates,
    choose_sequence,
    find_boundary_point,
    gamma_cone,
    hormander_hat,
    log_envelope,
    partial_sum,
    singularity_persistence,
    step2_bound,
    verify_eq10,
)
from microlocal.grid import Box, Grid, make_window
from microlocal.seminorms import decay_profile


def eq10_continuum_sup(s: float, rho: float = 0.5) -> float:
    """Sup over the ray of ``|u_hat| (1+|xi|)^s / 10^s`` by bounded scalar search.

    Off the ray the transverse factor is at most 1 and ``|xi| >= xi_1``
    only enlarges ``(1+|xi|)``; but the transverse support is
    ``|xi_perp| < xi_1^rho``, so ``1+|xi| <= 1 + xi_1 + xi_1^rho``.
    """
    chi = HormanderParams((1.0,), s).chi_profile

    def neg(a):
        return -((1 - chi(a)) * a ** (-s) * (1 + a + a**rho) ** s) / 10**s

    best = 0.0
    for lo, hi in ((0.5, 1.0), (1.0, 4.0), (4.0, 600.0)):
        r = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
        best = max(best, -r.fun, -neg(lo), -neg(hi))
    return best


class TestHat:
    @pytest.mark.parametrize("s", [1.0, 2.0, 3.0])
    @pytest.mark.parametrize("eta", [(1.0,), (1.0, 0.0), (0.6, -0.8)])
    def test_exact_power_on_ray(self, s, eta):
        p = HormanderParams(eta, s)
        lam = np.array([2.0, 4.0, 8.0, 16.0])
        vals = hormander_hat(p, lam[:, None] * np.asarray(eta)[None, :])
        np.testing.assert_allclose(vals, lam ** (-s), rtol=1e-14, atol=0)

    def test_example_value(self):
        assert hormander_hat(HormanderParams((1.0, 0.0), 2.0), np.array([4.0, 0.0])) == 0.0625

    def test_first_factor_vanishes(self):
        p = HormanderParams((1.0, 0.0), 2.0)
        xi = np.array([[0.5, 0.0], [0.3, 0.1], [-3.0, 0.0], [0.0, 5.0]])
        assert np.all(hormander_hat(p, xi) == 0)

    def test_transverse_cutoff(self):
        p = HormanderParams((1.0, 0.0), 2.0)
        a = 25.0
        xi = np.array([[a, a**p.rho * 1.0001], [a, -(a**p.rho) * 1.5]])
        assert np.all(hormander_hat(p, xi) == 0)

    def test_rho_range(self):
        with pytest.raises(ValueError):
            HormanderParams((1.0,), 1.0, rho=1.5)


class TestEq10:
    def test_s_zero(self):
        r = verify_eq10(HormanderParams((1.0,), 0.0), ball_lattice(1, 512, 0.25))
        assert r.holds and r.max_ratio <= 1

    @pytest.mark.parametrize("s", [1, 2, 3, 4])
    def test_1d(self, s):
        r = verify_eq10(HormanderParams((1.0,), s), ball_lattice(1, 512, 0.25))
        assert r.violations == 0
        assert 0 < r.max_ratio < 1

    @pytest.mark.parametrize("s", [1, 2, 3, 4])
    def test_2d(self, s):
        r = verify_eq10(HormanderParams((1.0, 0.0), s), ball_lattice(2, 512, 1.0))
        assert r.violations == 0 and r.max_ratio < 1

    @pytest.mark.parametrize("s", [1, 2, 3, 4])
    def test_max_ratio_below_continuum_sup(self, s):
        r = verify_eq10(HormanderParams((1.0,), s), ball_lattice(1, 512, 0.25))
        sup = eq10_continuum_sup(s)
        assert r.max_ratio <= sup * (1 + 1e-9)
        # the lattice contains xi = 1 where the ramp is done: ratio (2/10)^s
        assert r.max_ratio >= 0.2**s * (1 - 1e-12)

    def test_large_s_no_overflow(self):
        r = verify_eq10(HormanderParams((1.0,), 400.0), ball_lattice(1, 512, 0.25))
        assert r.holds

    def test_grid_lattice(self):
        assert verify_eq10(HormanderParams((1.0,), 2.0), Grid.default(1)).holds

    def test_negative_s(self):
        with pytest.raises(ValueError):
            verify_eq10(HormanderParams((1.0,), 2.0), ball_lattice(1, 4, 1.0), s=-1.0)


class TestBuildVm:
    grid = Grid.default(1)

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_decay_orders(self, m):
        delta = 4.0
        chi = make_window([0.0], delta / 4, self.grid)
        x_m = np.atleast_1d(self.grid.snap([1.5]))
        v = build_vm(HormanderParams((1.0,), float(m)), x_m, chi, delta)
        assert abs(decay_profile(v, x_m, [1.0], 1.0).fitted_exponent - m) <= 0.3
        assert decay_profile(v, x_m, [-1.0], 1.0).fitted_exponent >= 8
        assert v.support_box.lo[0] >= x_m[0] - delta / 2 - 1e-12
        assert v.support_box.hi[0] <= x_m[0] + delta / 2 + 1e-12

    def test_window_too_wide(self):
        chi = make_window([0.0], 1.5, self.grid)
        with pytest.raises(ValueError):
            build_vm(HormanderParams((1.0,), 1.0), [0.0], chi, 4.0)


class TestPlan:
    def test_valid(self, ce_setup):
        for n in (1, 2):
            assert ce_setup[n][2].check() == []

    def test_one_dimensional_shape(self, ce_setup):
        _, _, plan = ce_setup[1]
        x = plan.x[0]
        dist = [abs(t.x[0] - x) for t in plan.terms]
        assert [t.rho for t in plan.terms] == [3.0**-m for m in range(1, 7)]
        assert all(t.eta == plan.eta for t in plan.terms)
        assert all(b < a / 2 for a, b in zip(dist, dist[1:]))

    def test_two_dimensional_spiral(self, ce_setup):
        _, gamma, plan = ce_setup[2]
        eta = np.asarray(plan.eta)
        gaps = [np.linalg.norm(np.asarray(t.eta) - eta) for t in plan.terms]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        for m, t in enumerate(plan.terms[:-1]):
            assert gaps[m + 1] < t.rho / 2
        for i, ti in enumerate(plan.terms):
            for tk in plan.terms[i + 1:]:
                assert np.linalg.norm(np.asarray(ti.eta) - np.asarray(tk.eta)) > ti.rho / 2
        assert not in_dual_region(gamma, plan.x, plan.eta)

    def test_single_term(self, ce_setup):
        grid, gamma, plan = ce_setup[2]
        one = choose_sequence((plan.x, plan.eta), gamma, 1, grid=grid)
        assert one.M_max == 1 and one.check() == []

    def test_rejects_interior_point(self, ce_setup):
        grid, gamma, _ = ce_setup[2]
        with pytest.raises(ValueError):
            choose_sequence(((0.0, 0.0), (1.0, 0.0)), gamma, 3, grid=grid)

    def test_rejects_zero_terms(self, ce_setup):
        grid, gamma, plan = ce_setup[2]
        with pytest.raises(ValueError):
            choose_sequence((plan.x, plan.eta), gamma, 0, grid=grid)

    def test_boundary_point_2d(self, ce_setup):
        _, gamma, plan = ce_setup[2]
        eta = np.asarray(plan.eta)
        # the dual region is entered by any small rotation away from the flipped cap
        assert np.linalg.norm(eta - np.array([1.0, 0.0])) == pytest.approx(0.5, abs=1e-3)

    def test_boundary_point_1d(self):
        gamma = ConeSet(1, (ConePatch(Box((0.0,), (8.0,)), (-1.0,), 0.0),))
        x, eta = find_boundary_point(gamma, (0.3,), (1.0,))
        assert x == pytest.approx((0.0,), abs=1e-3) and eta == (1.0,)


class TestGammaM:
    @pytest.mark.parametrize("n", [1, 2])
    def test_excludes_and_contains(self, ce_setup, n):
        _, _, plan = ce_setup[n]
        for M in range(plan.M_max + 1):
            g = gamma_cone(plan, M)
            for t in plan.terms[:M]:
                assert not member(g.cone, t.x, t.eta)
            assert member(g.cone, plan.x, plan.eta)

    def test_cap_disjointness(self, ce_setup):
        _, _, plan = ce_setup[2]
        for i, a in enumerate(plan.terms):
            for b in plan.terms[i + 1:]:
                assert np.linalg.norm(np.asarray(a.eta) - np.asarray(b.eta)) > (a.rho + b.rho) / 4

    def test_range(self, ce_setup):
        with pytest.raises(ValueError):
            gamma_cone(ce_setup[2][2], 7)


class TestPartialSums:
    def test_first_sums(self, ce_setup):
        grid, _, plan = ce_setup[1]
        assert np.all(partial_sum(plan, 0, grid).values == 0)
        v1 = build_terms(plan, grid)[0]
        assert np.array_equal(partial_sum(plan, 1, grid).values, v1.values)

    def test_step2_bound(self, ce_setup):
        for n in (1, 2):
            grid, _, plan = ce_setup[n]
            f = make_window(np.asarray(plan.x), 0.5, grid)
            r = step2_bound(plan, f, grid)
            assert r.holds
            assert all(b <= r.cap for b in r.bounds)


class TestEnvelope:
    @given(st.integers(0, 30), st.integers(0, 30))
    def test_log_envelope_matches_direct_sum(self, q, p):
        direct = sum(10.0**k / factorial(k) for k in range(q + 1, p + 1))
        got = log_envelope(q, p)
        if p <= q:
            assert got == float("-inf")
        else:
            assert np.exp(got) == pytest.approx(direct, rel=1e-12)

    def test_no_overflow(self):
        assert np.isfinite(log_envelope(400, 500))


class TestCauchy:
    def test_equal_indices_zero(self, ce_setup):
        grid, _, plan = ce_setup[1]
        rep = cauchy_rates(plan, cauchy_specs(plan, grid, 1), [(3, 3), (4, 2)], grid, 1)
        assert all(r.measured == 0 for r in rep.rows if r.p == r.q)

    @pytest.mark.parametrize("n", [1, 2])
    def test_dominated(self, ce_setup, n):
        grid, _, plan = ce_setup[n]
        pairs = [(p, q) for q in range(1, 7) for p in range(q, 7)]
        rep = cauchy_rates(plan, cauchy_specs(plan, grid, 1), pairs, grid, 1)
        assert rep.dominated and rep.monotone
        assert all(c > 0 for c in rep.constants[:2])

    def test_inadmissible_spec(self, ce_setup):
        grid, _, plan = ce_setup[2]
        t = plan.terms[3]
        w = make_window(t.x, 0.5, grid)
        spec = cauchy_specs(plan, grid, 1)[0].__class__(0, ConeSet(2, (ConePatch(w.support_box, t.eta, 0.01),)), w)
        with pytest.raises(ValueError, match="Gamma_1"):
            cauchy_rates(plan, [spec], [(6, 1)], grid, 1)


class TestPersistence:
    def test_two_dimensions(self, ce_setup):
        grid, _, plan = ce_setup[2]
        for r in singularity_persistence(plan, grid, orders=range(1, 6)):
            assert abs(r.exponent_sum - r.m) <= 0.5
            assert abs(r.exponent_sum - r.exponent_term) <= 0.05
