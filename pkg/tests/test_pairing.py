import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import pairing_triples
from microlocal.bank import random_pair_bank, random_smooth_field
from microlocal.cones import ConePatch, ConeSet, member, sample_directions
from microlocal.counterexample import HormanderParams, hormander_field
from microlocal.grid import Box, Bump, Grid, SampledField, make_window
from microlocal.pairing import (
    AngularCutoff,
    build_conic_partition,
    eval_eq3_bound,
    pair_direct,
    pair_space_oracle,
    pair_split,
    spectral_order,
    tail_integral,
)

G1 = Grid.default(1)
G2 = Grid.default(2)


class TestPairDirect:
    def test_zero(self):
        assert pair_direct(make_window([0.0], 1.0, G1), SampledField.zeros(G1)) == 0

    def test_against_riemann_sum(self):
        u = make_window([0.3], 1.0, G1)
        v = make_window([-0.2], 0.7, G1, profile="gauss")
        ref = np.sum(u.values * v.values) * G1.cell_volume
        assert abs(pair_direct(u, v) - ref) <= 1e-8 * abs(ref)

    def test_bilinear_exact(self):
        rng = np.random.default_rng(0)
        u, v = random_smooth_field(G1, rng), random_smooth_field(G1, rng)
        assert pair_direct(2 * u, v) == pytest.approx(2 * pair_direct(u, v), rel=1e-15)

    def test_phi_must_cover_v(self):
        u = make_window([0.0], 1.0, G1)
        v = make_window([2.0], 1.0, G1)
        with pytest.raises(ValueError):
            pair_direct(u, v, make_window([0.0], 1.0, G1))

    def test_phi_independence(self):
        for u, v in random_pair_bank(G1, 9, 10):
            ref = pair_direct(u, v)
            phi1 = plateau_around(v.support_box, 0.05)
            phi2 = plateau_around(v.support_box, 0.6)
            a, b = pair_direct(u, v, phi1), pair_direct(u, v, phi2)
            assert abs(a - b) <= 1e-9 * abs(ref)
            assert abs(a - ref) <= 1e-9 * abs(ref)


def plateau_around(box, margin):
    """Smooth cutoff equal to 1 on ``box`` and 0 beyond ``2*margin`` from it."""
    d = box.distance(G1.points)
    return SampledField.masked(G1, Bump(margin, 2 * margin)(d), box.expand(2 * margin))


class TestSpaceOracle:
    def test_disjoint_supports(self):
        assert pair_space_oracle(make_window([-3.0], 1.0, G1), make_window([3.0], 1.0, G1)) == 0

    def test_square_exceeds_plateau(self):
        w = make_window([0.0], 1.0, G1)
        assert pair_space_oracle(w, w).real >= 2.0

    @pytest.mark.parametrize("dim", [1, 2])
    def test_agrees_with_direct(self, dim):
        g = G1 if dim == 1 else Grid(Box.cube(2, 8.0), (128, 128))
        for u, v in random_pair_bank(g, 42, 20):
            d, o = pair_direct(u, v), pair_space_oracle(u, v)
            # Cauchy-Schwarz scale: separated pairs pair to zero
            scale = max(abs(o), np.sqrt(pair_space_oracle(u, u.conj()).real * pair_space_oracle(v, v.conj()).real))
            assert abs(d - o) <= 1e-8 * scale

    @given(st.integers(0, 10_000))
    def test_bilinear_both_slots(self, seed):
        rng = np.random.default_rng(seed)
        u, v, w = (random_smooth_field(G1, rng) for _ in range(3))
        a, b = rng.normal(size=2)
        assert pair_direct(u, a * v + b * w) == pytest.approx(a * pair_direct(u, v) + b * pair_direct(u, w), rel=1e-10, abs=1e-14)
        assert pair_direct(a * u + b * w, v) == pytest.approx(a * pair_direct(u, v) + b * pair_direct(w, v), rel=1e-10, abs=1e-14)


class TestTailIntegral:
    @pytest.mark.parametrize("N", [2.0, 3.0, 5.5])
    def test_closed_form_1d(self, N):
        assert tail_integral(1, N) == pytest.approx(1 / (np.pi * (N - 1)), rel=1e-10)

    @pytest.mark.parametrize("N", [3.0, 4.0, 7.0])
    def test_closed_form_2d(self, N):
        assert tail_integral(2, N) == pytest.approx(1 / (2 * np.pi * (N - 1) * (N - 2)), rel=1e-10)

    def test_divergent(self):
        with pytest.raises(ValueError):
            tail_integral(2, 2.0)


class TestAngularCutoff:
    def test_zero_at_origin_and_inside(self):
        a = AngularCutoff(2, ((1.0, 0.0),), (0.2,), 0.0125)
        assert a(np.zeros((1, 2)))[0] == 0.0
        assert a(np.array([[5.0, 0.0]]))[0] == 1.0
        assert a(np.array([[-5.0, 0.0]]))[0] == 0.0


class TestPartition:
    def test_empty_gamma(self):
        K = Box.cube(2, 1.0)
        part = build_conic_partition(ConeSet.empty(2), ConeSet.empty(2), K, grid=G2)
        assert len(part.pieces) == 1
        assert part.unity_deviation() <= 1e-10
        assert np.all(part.pieces[0].alpha(G2.freqs) == 0)

    @pytest.fixture(scope="class")
    @classmethod
    def separated(cls):
        gamma = ConeSet(2, (ConePatch(Box((0.0, -8.0), (8.0, 8.0)), (1.0, 0.0), 0.2),))
        wf = ConeSet(2, (ConePatch(G2.box, (1.0, 0.0), 0.2),))
        K = Box.cube(2, 2.0)
        return gamma, wf, K, build_conic_partition(gamma, wf, K, grid=G2)

    def test_conditions_by_brute_force(self, separated):
        gamma, wf, K, part = separated
        assert part.unity_deviation() <= 1e-10
        dirs = sample_directions(2, 360)
        for piece in part.pieces:
            assert piece.gap >= 0.05
            pts = G2.points[np.abs(piece.psi.values) > 0]
            sub = pts[:: max(1, len(pts) // 40)]
            in_Vu = piece.V_u.directions_member(dirs)
            in_Vv = piece.V_v.directions_member(dirs)
            for x in sub:
                # gamma's fiber sits inside V_u, wf_v's fiber inside V_v
                assert np.all(in_Vu[member(gamma, x, dirs)])
                assert np.all(in_Vv[member(wf, x, dirs)])
            # V_u and -V_v keep the margin
            a_dirs, b_dirs = dirs[in_Vu], -dirs[in_Vv]
            if len(a_dirs) and len(b_dirs):
                gap = np.min(np.linalg.norm(a_dirs[:, None] - b_dirs[None], axis=-1))
                assert gap >= 0.05 - 2 * np.sin(np.pi / 360)

    def test_overlap_raises(self):
        gamma = ConeSet(2, (ConePatch(Box((0.0, -8.0), (8.0, 8.0)), (1.0, 0.0), 0.2),))
        wf = ConeSet(2, (ConePatch(G2.box, (-1.0, 0.0), 0.2),))
        with pytest.raises(ValueError, match="x="):
            build_conic_partition(gamma, wf, Box.cube(2, 2.0), grid=G2)

    def test_budget(self):
        gamma = ConeSet(1, (ConePatch(Box((0.0,), (8.0,)), (1.0,), 0.0),))
        wf = ConeSet(1, (ConePatch(Box((-8.0,), (0.0,)), (-1.0,), 0.0),))
        with pytest.raises(ValueError):
            build_conic_partition(gamma, wf, Box.cube(1, 2.0), piece_budget=1, grid=G1)


class TestSplit:
    def test_zero_v(self):
        u, _, part = pairing_triples(3, 1)[0]
        rep = pair_split(u, SampledField.zeros(G1), part)
        assert all(z == 0 for piece in rep.pieces for z in piece)

    def test_triples(self):
        for u, v, part in pairing_triples(2024, 4):
            rep = pair_split(u, v, part)
            assert max(abs(p[0]) for p in rep.pieces) <= 1e-14
            assert rep.relative_discrepancy <= 1e-8

    def test_2d(self):
        gamma = ConeSet(2, (ConePatch(Box((0.0, -8.0), (8.0, 8.0)), (1.0, 0.0), 0.2),))
        wf = ConeSet(2, (ConePatch(Box((-8.0, -8.0), (-0.5, 8.0)), (-1.0, 0.0), 0.2),))
        part = build_conic_partition(gamma, wf, Box.cube(2, 2.0), grid=G2)
        u = make_window((1.0, 0.0), 0.5, G2)
        v = make_window((0.3, 0.2), 0.4, G2, profile="gauss")
        rep = pair_split(u, v, part)
        assert abs(rep.direct) > 0.01
        assert max(abs(p[0]) for p in rep.pieces) <= 1e-14
        assert rep.relative_discrepancy <= 1e-8
        assert '"direct"' in rep.to_json()


class TestBound:
    def test_bank(self):
        for u, v, part in pairing_triples(2024, 4):
            b = eval_eq3_bound(u, v, part, 2, 4)
            assert b.holds and b.slack >= 1

    def test_zero_v(self):
        u, _, part = pairing_triples(3, 1)[0]
        b = eval_eq3_bound(u, SampledField.zeros(G1), part, 2, 4)
        assert b.lhs == 0 and b.holds
        assert all(r.tail_term == 0 and r.cross_term == 0 for r in b.pieces)

    def test_hormander_against_disjoint_v(self):
        grid = G1
        u = hormander_field(HormanderParams((1.0,), 2.0), grid)
        v = make_window([0.2], 0.6, grid) * SampledField.from_function(grid, lambda x: np.cos(3 * x[..., 0]))
        gamma = ConeSet(1, (ConePatch(grid.box, (1.0,), 0.0),))
        part = build_conic_partition(gamma, ConeSet.empty(1), v.support_box.expand(0.25), grid=grid)
        b = eval_eq3_bound(u, v, part, 2, 4)
        assert b.holds
        assert np.isfinite(b.slack) and b.slack > 1
        assert "slack" in b.to_json()

    def test_order_conditions(self):
        u, v, part = pairing_triples(3, 1)[0]
        with pytest.raises(ValueError, match="order conditions"):
            eval_eq3_bound(u, v, part, 0, 1)


def test_spectral_order_smooth_is_zero():
    v = make_window([0.0], 1.0, G1)
    from microlocal.grid import dft_forward

    m, C = spectral_order(dft_forward(v).values, G1.freq_norm, G1.k_max)
    assert m == 0 and C > 0
