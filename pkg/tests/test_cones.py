import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from microlocal.cones import (
    ConePatch,
    ConeSet,
    cap_distance,
    complement,
    disjoint_support_check,
    distance,
    exhaustion,
    flip,
    in_dual_region,
    member,
    sample_directions,
)
from microlocal.grid import Box, Grid, make_window

OMEGA2 = Box.cube(2, 4.0)


def unit(angle):
    return np.array([np.cos(angle), np.sin(angle)])


def random_cone(rng, n=2, patches=3, omega=OMEGA2):
    out = []
    for _ in range(patches):
        a = rng.uniform(omega.lo, omega.hi)
        b = rng.uniform(omega.lo, omega.hi)
        region = Box(tuple(np.minimum(a, b)), tuple(np.maximum(a, b)))
        c = unit(rng.uniform(0, 2 * np.pi)) if n == 2 else (rng.choice([-1.0, 1.0]),)
        out.append(ConePatch(region, tuple(c), float(rng.uniform(0, 1.2)) if n == 2 else 0.0))
    return ConeSet(n, tuple(out))


def random_samples(rng, count, n=2, omega=OMEGA2):
    if isinstance(rng, int):
        rng = np.random.default_rng([rng, 99])  # independent of the cone streams
    x = rng.uniform(omega.lo, omega.hi, size=(count, n))
    if n == 1:
        eta = rng.choice([-1.0, 1.0], size=(count, 1))
    else:
        eta = np.stack([unit(a) for a in rng.uniform(0, 2 * np.pi, count)])
    return x, eta


cone_strategy = st.builds(lambda seed: random_cone(np.random.default_rng(seed)), st.integers(0, 100_000))


class TestMember:
    def test_empty(self):
        assert member(ConeSet.empty(2), [0.0, 0.0], [1.0, 0.0]) is False

    def test_full_cap(self):
        c = ConeSet(2, (ConePatch(OMEGA2, (1.0, 0.0), 2.0),))
        for a in np.linspace(0, 2 * np.pi, 17):
            assert member(c, [0.0, 0.0], unit(a))

    def test_boundary_closed_vs_open(self):
        r = 0.5
        half = 2 * np.arcsin(r / 2)
        eta = unit(half)
        patch = ConePatch(OMEGA2, (1.0, 0.0), r)
        assert member(ConeSet(2, (patch,), closed=True), [0.0, 0.0], eta)
        assert not member(ConeSet(2, (patch,), closed=False), [0.0, 0.0], eta)

    def test_vectorised(self):
        rng = np.random.default_rng(0)
        c = random_cone(rng)
        x, eta = random_samples(rng, 50)
        vec = member(c, x, eta)
        assert vec.shape == (50,)
        assert list(vec) == [member(c, xi, ei) for xi, ei in zip(x, eta)]


class TestFlip:
    def test_empty(self):
        assert flip(ConeSet.empty(2)) == ConeSet.empty(2)

    @given(cone_strategy)
    def test_involution_exact(self, cone):
        assert flip(flip(cone)) == cone

    def test_definition_replay(self):
        rng = np.random.default_rng(7)
        c = random_cone(rng)
        x, eta = random_samples(rng, 100)
        assert np.array_equal(member(flip(c), x, eta), member(c, x, -eta))


class TestComplement:
    def test_empty_cone(self):
        lam = complement(ConeSet.empty(2), OMEGA2)
        x, eta = random_samples(np.random.default_rng(1), 200)
        assert member(lam, x, eta).all()

    def test_full_cone(self):
        lam = complement(ConeSet.full(OMEGA2), OMEGA2)
        x, eta = random_samples(np.random.default_rng(2), 200)
        assert not member(lam, x, eta).any()

    @given(cone_strategy, st.integers(0, 1000))
    def test_xor_definition(self, gamma, seed):
        lam = complement(flip(gamma), OMEGA2)
        x, eta = random_samples(seed, 300)
        xor = member(lam, x, eta) ^ member(gamma, x, -eta)
        assert xor.all()

    def test_open_flag(self):
        assert complement(ConeSet.empty(1), Box.cube(1, 1.0)).closed is False

    def test_one_dimension(self):
        om = Box.cube(1, 4.0)
        gamma = ConeSet(1, (ConePatch(Box((0.0,), (4.0,)), (1.0,), 0.0),))
        lam = complement(gamma, om)
        x, eta = random_samples(np.random.default_rng(3), 200, n=1, omega=om)
        assert (member(lam, x, eta) ^ member(gamma, x, eta)).all()


class TestDistance:
    def test_inside(self):
        c = ConeSet(2, (ConePatch(Box.cube(2, 1.0), (1.0, 0.0), 0.3),))
        assert distance([0.2, 0.1], [1.0, 0.0], c) == 0.0

    def test_empty_is_infinite(self):
        assert distance([0.0, 0.0], [1.0, 0.0], ConeSet.empty(2)) == np.inf

    def test_spatial_offset(self):
        c = ConeSet(2, (ConePatch(Box.cube(2, 1.0), (1.0, 0.0), 0.3),))
        assert abs(distance([1.0 + 0.37, 0.0], [1.0, 0.0], c) - 0.37) <= 1e-9

    def test_cap_chord(self):
        # angle 1 rad away from the axis, cap chord radius 0
        d = cap_distance(unit(1.0), np.array([1.0, 0.0]), 0.0)
        assert abs(d - 2 * np.sin(0.5)) < 1e-12

    @given(cone_strategy, st.integers(0, 1000))
    def test_zero_iff_member(self, cone, seed):
        x, eta = random_samples(seed, 200)
        assert np.array_equal(distance(x, eta, cone) == 0, member(cone, x, eta))


class TestExhaustion:
    gamma = ConeSet(2, (ConePatch(Box((0.0, -4.0), (4.0, 4.0)), (1.0, 0.0), 0.6),))

    def test_requires_positive_ell(self):
        with pytest.raises(ValueError):
            exhaustion(self.gamma, OMEGA2, 0)

    def test_disjoint_from_gamma_prime(self):
        ex = exhaustion(self.gamma, OMEGA2, 4)
        x, eta = random_samples(np.random.default_rng(4), 1000)
        assert not (member(ex.Lambda_ell, x, eta) & member(self.gamma, x, eta)).any()

    def test_covers_interior_when_slack(self):
        om = Box.cube(1, 4.0)
        ex = exhaustion(ConeSet.empty(1), om, 20)
        pts = ex.samples
        interior = (np.abs(pts[:, 0]) <= 4.0 - 1 / 20) & (np.abs(pts[:, 0]) <= 20)
        assert len(ex.K_ell) == int(interior.sum())

    def test_nested_and_inside(self):
        lam = complement(self.gamma, OMEGA2)
        x, eta = random_samples(np.random.default_rng(5), 1000)
        prev_K = set()
        prev = np.zeros(len(x), bool)
        for ell in range(1, 9):
            ex = exhaustion(self.gamma, OMEGA2, ell)
            cur = member(ex.Lambda_ell, x, eta)
            assert not (prev & ~cur).any()
            assert not (cur & ~member(lam, x, eta)).any()
            K = {tuple(p) for p in ex.K_ell}
            assert prev_K <= K
            prev, prev_K = cur, K


class TestSupportCheck:
    def test_away_from_gamma(self):
        g = Grid(OMEGA2, (64, 64))
        gamma = ConeSet(2, (ConePatch(Box((1.0, -4.0), (4.0, 4.0)), (1.0, 0.0), 2.0),))
        chi = make_window([-2.0, 0.0], 0.5, g)
        V = ConeSet.full(OMEGA2)
        assert disjoint_support_check(chi, V, gamma)

    def test_full_sphere_overlap(self):
        g = Grid(OMEGA2, (64, 64))
        gamma = ConeSet(2, (ConePatch(Box((-1.0, -1.0), (1.0, 1.0)), (1.0, 0.0), 0.1),))
        chi = make_window([0.0, 0.0], 0.5, g)
        assert not disjoint_support_check(chi, ConeSet.full(OMEGA2), gamma)

    @pytest.mark.parametrize("seed", range(8))
    def test_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        g = Grid(OMEGA2, (32, 32))
        gamma = random_cone(rng, patches=2)
        V = random_cone(rng, patches=1)
        chi = make_window(rng.uniform(-1.5, 1.5, 2), 0.5, g)
        dirs = sample_directions(2, 36)
        pts = g.points.reshape(-1, 2)[np.abs(chi.values.reshape(-1)) > 0]
        in_V = V.directions_member(dirs)
        brute = True
        for x in pts:
            for eta, ok in zip(dirs, in_V):
                if ok and member(gamma, x, eta):
                    brute = False
                    break
            if not brute:
                break
        assert disjoint_support_check(chi, V, gamma, dirs) == brute


def test_dual_region():
    gamma = ConeSet(2, (ConePatch(OMEGA2, (1.0, 0.0), 0.2),))
    assert not in_dual_region(gamma, [0.0, 0.0], [-1.0, 0.0])
    assert in_dual_region(gamma, [0.0, 0.0], [1.0, 0.0])


def test_direction_sampling():
    assert sample_directions(1).tolist() == [[1.0], [-1.0]]
    d = sample_directions(2, 360)
    assert d.shape == (360, 2)
    np.testing.assert_allclose(np.linalg.norm(d, axis=1), 1.0)
