"""Explicit family with prescribed one-directional singularities.

The building block is the band-limited field with Fourier transform

    u_hat(xi) = (1 - chi(xi_1)) * xi_1**(-s) * chi(|xi_perp|**2 / xi_1**(2 rho)),

where ``xi_1 = xi . eta`` and ``chi`` is 1 below 1/2 and 0 above 1.  Along
the ray ``lambda*eta`` (``lambda >= 1``) it equals ``lambda**(-s)`` exactly,
and it obeys ``|u_hat(xi)| <= 10**s (1 + |xi|)**(-s)`` everywhere.

Translated, windowed copies ``v_m`` of order ``m`` placed at points
``(x_m; eta_m)`` accumulating at a boundary point ``(x; eta)`` form the
partial sums ``S_m = sum_{k<=m} v_k / k!``.  This module builds the
sequence of points, the closed cones ``Gamma_M`` that carry the tails
``S_p - S_q`` (``p > q >= M``), and the measurements that go with them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import lgamma, log

import numpy as np

from .cones import ConePatch, ConeSet, cap_distance, fiber_arcs, flip, in_dual_region, member
from .grid import Box, Bump, Grid, SampledField, SpectralField, deriv_sup_norm, dft_inverse, make_window, translate
from .seminorms import BETA, SeminormSpec, decay_profile, eval_seminorm

__all__ = [
    "HormanderParams",
    "Eq10Report",
    "SequenceTerm",
    "SequencePlan",
    "GammaM",
    "CauchyRow",
    "CauchyReport",
    "PersistenceRow",
    "Step2Report",
    "hormander_hat",
    "hormander_spectrum",
    "ball_lattice",
    "verify_eq10",
    "hormander_field",
    "build_vm",
    "counterexample_grid",
    "find_boundary_point",
    "choose_sequence",
    "gamma_cone",
    "build_terms",
    "partial_sum",
    "log_envelope",
    "cauchy_rates",
    "singularity_persistence",
    "step2_bound",
    "tail_integral",
]

DEFAULT_CHI = Bump(0.5, 1.0)


@dataclass(frozen=True)
class HormanderParams:
    """Direction ``eta``, order ``s``, shape ``rho`` and 1D cutoff ``chi_profile``."""

    eta: tuple[float, ...]
    s: float
    rho: float = 0.5
    chi_profile: Bump = DEFAULT_CHI

    def __post_init__(self):
        e = np.asarray(self.eta, float).reshape(-1)
        nrm = np.linalg.norm(e)
        if nrm == 0:
            raise ValueError("eta must be nonzero")
        if abs(nrm - 1) > 1e-12:
            e = e / nrm
        if not (0 < self.rho < 1):
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        object.__setattr__(self, "eta", tuple(float(a) for a in e))

    @property
    def n(self) -> int:
        return len(self.eta)


def hormander_hat(params: HormanderParams, xi) -> np.ndarray:
    """Closed-form transform at frequency points ``xi`` of shape ``(..., n)``."""
    xi = np.asarray(xi, float)
    eta = np.asarray(params.eta)
    if xi.shape[-1] != eta.size:
        raise ValueError("frequency points have the wrong dimension")
    xi1 = xi @ eta
    perp2 = np.maximum(np.sum(xi**2, axis=-1) - xi1**2, 0.0) if eta.size > 1 else np.zeros_like(xi1)
    out = np.zeros_like(xi1)
    pos = xi1 > 0
    a = xi1[pos]
    out[pos] = (1 - params.chi_profile(a)) * a ** (-params.s) * params.chi_profile(perp2[pos] / a ** (2 * params.rho))
    return out


def hormander_spectrum(params: HormanderParams) -> SpectralField:
    """Callable spectral field of the family member."""
    return SpectralField(func=lambda k: hormander_hat(params, k))


def ball_lattice(n: int, radius: float, spacing: float) -> np.ndarray:
    """Cubic lattice points of the given spacing inside ``|xi| <= radius``."""
    m = int(np.floor(radius / spacing))
    ax = spacing * np.arange(-m, m + 1)
    pts = np.stack(np.meshgrid(*([ax] * n), indexing="ij"), axis=-1).reshape(-1, n)
    return pts[np.sum(pts**2, axis=1) <= radius**2 * (1 + 1e-12)]


@dataclass(frozen=True)
class Eq10Report:
    """Scan of ``|u_hat| (1+|xi|)^s / 10^s`` over a lattice."""

    s: float
    max_ratio: float
    argmax: tuple[float, ...]
    violations: int
    points: int
    holds: bool

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "max_ratio": self.max_ratio,
            "argmax": list(self.argmax),
            "violations": self.violations,
            "points": self.points,
            "holds": self.holds,
        }


def verify_eq10(params: HormanderParams, lattice, s: float | None = None) -> Eq10Report:
    """Check ``|u_hat(xi)| <= 10^s (1+|xi|)^(-s)`` on every lattice point.

    ``lattice`` is a :class:`Grid` (its frequency lattice is used) or an
    array of frequency points.  ``s`` overrides ``params.s``.
    """
    if s is not None:
        params = HormanderParams(params.eta, s, params.rho, params.chi_profile)
    if params.s < 0:
        raise ValueError("the bound is stated for s >= 0")
    pts = lattice.freqs.reshape(-1, lattice.n) if isinstance(lattice, Grid) else np.asarray(lattice, float)
    vals = hormander_hat(params, pts)
    r = np.sqrt(np.sum(pts**2, axis=-1))
    # compare in log space so large s cannot overflow
    with np.errstate(divide="ignore"):
        log_ratio = np.log(np.abs(vals)) + params.s * np.log1p(r) - params.s * log(10.0)
    i = int(np.argmax(log_ratio))
    max_ratio = float(np.exp(log_ratio[i])) if np.isfinite(log_ratio[i]) else 0.0
    violations = int(np.sum(log_ratio > 0))
    return Eq10Report(float(params.s), max_ratio, tuple(map(float, pts[i])), violations, len(pts), violations == 0)


@lru_cache(maxsize=8)
def _hormander_field_cached(params: HormanderParams, grid: Grid, taper: tuple[float, float]) -> SampledField:
    k_max = grid.k_max
    spec = hormander_hat(params, grid.freqs)
    spec = spec * Bump(taper[0] * k_max, taper[1] * k_max)(grid.freq_norm)
    return dft_inverse(SpectralField(grid, spec))


def hormander_field(
    params: HormanderParams, grid: Grid, *, taper: tuple[float, float] = (0.85, 0.98), min_k_max: float = 40.0
) -> SampledField:
    """Band-limited regularization sampled on ``grid``.

    The closed form is multiplied by a radial cutoff that is 1 up to
    ``taper[0]*k_max`` and 0 beyond ``taper[1]*k_max`` before the inverse
    transform, so no energy wraps around the Nyquist edge into the
    opposite direction.
    """
    if params.n != grid.n:
        raise ValueError("params and grid have different dimensions")
    if grid.k_max < min_k_max:
        raise ValueError(f"grid k_max = {grid.k_max:.3g} is below the required {min_k_max}")
    return _hormander_field_cached(params, grid, tuple(taper))


def build_vm(params: HormanderParams, x_m, chi_window: SampledField, delta: float) -> SampledField:
    """``T_{x_m}(chi * u)`` for a window ``chi`` centred at the origin.

    Raises ``ValueError`` if ``chi`` is not supported in ``ball(0, delta/2)``
    or if ``x_m`` is not a lattice shift.
    """
    grid = chi_window.grid
    nz = np.abs(chi_window.values) > 0
    if np.any(nz):
        reach = float(np.max(np.sqrt(np.sum(grid.points[nz] ** 2, axis=-1))))
        if reach > delta / 2 + 1e-12:
            raise ValueError(f"window reaches {reach:.6g}, beyond delta/2 = {delta / 2:.6g}")
    u = hormander_field(params, grid)
    return translate(u * chi_window, x_m)


def counterexample_grid(n: int) -> Grid:
    """Default grid for the sequence construction.

    1D uses ``2**19`` points on ``[-8, 8]``: the sequence points cluster
    geometrically, so the measurement windows shrink and the fit has to
    reach ``|k|`` in the tens of thousands.  2D uses 1024 x 1024 points on
    ``[-16, 16]^2``: the same resolution as the standard 2D grid on a box
    wide enough to keep the translated windows apart.
    """
    if n == 1:
        return Grid(Box((-8.0,), (8.0,)), (2**19,))
    if n == 2:
        return Grid(Box((-16.0, -16.0), (16.0, 16.0)), (1024, 1024))
    raise ValueError(f"only dimensions 1 and 2 are supported, got {n}")


@dataclass(frozen=True)
class SequenceTerm:
    x: tuple[float, ...]
    eta: tuple[float, ...]
    rho: float


@dataclass(frozen=True)
class SequencePlan:
    """Points ``(x_m; eta_m)`` with radii ``rho_m`` accumulating at ``(x; eta)``.

    Attributes
    ----------
    n : int
    x, eta : tuple
        Boundary point.
    terms : tuple of SequenceTerm
        ``terms[m-1]`` holds ``(x_m, eta_m, rho_m)``.
    gamma : ConeSet
        The closed cone the construction starts from.
    omega : Box
    point_radius : float
        Half-width of the spatial boxes that stand for single points in
        the cones built from the plan.
    """

    n: int
    x: tuple[float, ...]
    eta: tuple[float, ...]
    terms: tuple[SequenceTerm, ...]
    gamma: ConeSet = field(repr=False)
    omega: Box = field(repr=False)
    point_radius: float = 1e-3

    @property
    def M_max(self) -> int:
        return len(self.terms)

    @property
    def points(self) -> np.ndarray:
        return np.array([t.x for t in self.terms] + [self.x])

    @property
    def delta(self) -> float:
        """Distance from the point set to the complement of the box."""
        return float(np.min(self.omega.distance_to_exterior(self.points)))

    def separation(self, m: int) -> float:
        """Distance from ``x_m`` to the nearest other ``x_k``."""
        xm = np.asarray(self.terms[m - 1].x)
        others = [np.asarray(t.x) for k, t in enumerate(self.terms, 1) if k != m]
        d = [np.linalg.norm(xm - o) for o in others if np.linalg.norm(xm - o) > 0]
        return float(min(d)) if d else float("inf")

    def measurement_radius(self, m: int) -> float:
        """Plateau radius of a window at ``x_m`` that stays clear of the other terms.

        Its support sits inside the plateau of ``v_m``'s own window and
        outside the supports of the other terms when they are far enough
        apart; otherwise it is half the distance to the nearest point.
        """
        plateau = self.delta / 4
        sep = self.separation(m)
        reach = self.delta / 2
        room = sep - reach if sep > reach else sep / 2
        return 0.5 * min(plateau, room)

    def check(self) -> list[str]:
        """Construction inequalities that fail on this plan (empty when valid)."""
        bad = []
        x = np.asarray(self.x)
        eta = np.asarray(self.eta)
        T = self.terms
        for m, t in enumerate(T, 1):
            xm, em = np.asarray(t.x), np.asarray(t.eta)
            if not in_dual_region(self.gamma, xm, em):
                bad.append(f"(x_{m}; eta_{m}) is not in the dual region")
            if self.n == 1:
                if not np.array_equal(em, eta):
                    bad.append(f"eta_{m} != eta")
                if not np.linalg.norm(xm - x) > 0:
                    bad.append(f"x_{m} == x")
                if not np.linalg.norm(xm - x) < 1:
                    bad.append(f"|x_{m} - x| >= 1")
                if m < len(T) and not np.linalg.norm(np.asarray(T[m].x) - x) < np.linalg.norm(xm - x) / 2:
                    bad.append(f"|x_{m + 1} - x| >= |x_{m} - x|/2")
                if t.rho != 3.0**-m:
                    bad.append(f"rho_{m} != 3^-{m}")
            else:
                dist_eta = float(np.linalg.norm(em - eta))
                if not dist_eta > 0:
                    bad.append(f"eta_{m} == eta")
                if not dist_eta < 1:
                    bad.append(f"|eta_{m} - eta| >= 1")
                bound = min(dist_eta, _dist_to_flipped_fiber(self.gamma, xm, em))
                if t.rho != bound:
                    bad.append(f"rho_{m} differs from min(|eta_m - eta|, d(eta_m, -Gamma_x_m))")
                if m < len(T) and not np.linalg.norm(np.asarray(T[m].eta) - eta) < bound / 2:
                    bad.append(f"|eta_{m + 1} - eta| >= rho_{m}/2")
                for k in range(m + 1, len(T) + 1):
                    if not np.linalg.norm(em - np.asarray(T[k - 1].eta)) > t.rho / 2:
                        bad.append(f"|eta_{m} - eta_{k}| <= rho_{m}/2")
        return bad

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "x": list(self.x),
            "eta": list(self.eta),
            "delta": self.delta,
            "terms": [
                {"m": m, "x": list(t.x), "eta": list(t.eta), "rho": t.rho} for m, t in enumerate(self.terms, 1)
            ],
        }


def _dist_to_flipped_fiber(gamma: ConeSet, x, eta) -> float:
    """Chord distance from ``eta`` to ``{-xi : (x; xi) in gamma}`` (inf if empty)."""
    g = flip(gamma)
    if not g.patches:
        return float("inf")
    active = g.region_mask(np.asarray(x, float))
    if not np.any(active):
        return float("inf")
    _, _, c, r = g._arrays
    return float(np.min(cap_distance(np.asarray(eta, float)[None, :], c[active], r[active])))


def find_boundary_point(gamma: ConeSet, seed_x, seed_eta, *, step: float = 1e-3):
    """Point ``(x; eta)`` on the boundary of the dual region nearest a seed.

    In 2D ``x`` is the seed point and ``eta`` the end of a flipped-fiber arc
    closest to ``seed_eta``.  In 1D ``eta`` is the seed direction and ``x``
    the nearest end of a patch region whose flipped cap contains it, where
    the dual region is entered within ``step``.

    Raises
    ------
    ValueError
        If the dual region has no boundary point near the seed.
    """
    x0 = np.asarray(seed_x, float).reshape(-1)
    e0 = np.asarray(seed_eta, float).reshape(-1)
    e0 = e0 / np.linalg.norm(e0)
    g = flip(gamma)
    if gamma.n == 2:
        active = g.region_mask(x0)
        arcs = fiber_arcs(g, active) if np.any(active) else []
        if not arcs or arcs[0][1] >= 2 * np.pi:
            raise ValueError(f"the flipped fiber at x={tuple(x0)} has no boundary directions")
        ends = [a for s0, length in arcs for a in (s0, s0 + length)]
        dirs = np.array([[np.cos(a), np.sin(a)] for a in ends])
        eta = dirs[int(np.argmin(np.linalg.norm(dirs - e0, axis=1)))]
        if in_dual_region(gamma, x0, eta):
            raise ValueError("arc end is not in the closed flipped cone")
        return tuple(map(float, x0)), tuple(map(float, eta))
    cands = []
    for p in g.patches:
        if abs(e0[0] - p.cap_center[0]) <= p.cap_radius + 1e-12:
            cands.extend([p.region.lo[0], p.region.hi[0]])
    cands.sort(key=lambda c: abs(c - x0[0]))
    for c in cands:
        x = np.array([c])
        if in_dual_region(gamma, x, e0):
            continue
        if in_dual_region(gamma, x - step, e0) or in_dual_region(gamma, x + step, e0):
            return (float(c),), (float(e0[0]),)
    raise ValueError(f"no boundary point of the dual region found along eta={tuple(e0)}")


def _rotate(eta: np.ndarray, angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([c * eta[0] - s * eta[1], s * eta[0] + c * eta[1]])


def choose_sequence(
    boundary,
    gamma: ConeSet,
    M_max: int,
    n: int | None = None,
    *,
    grid: Grid,
    layout: str | None = None,
    ratio: float = 0.45,
    first_offset: float = 0.9,
    spread_radius: float | None = None,
) -> SequencePlan:
    """Pick ``(x_m; eta_m, rho_m)``, ``m = 1..M_max``, next to a boundary point.

    Parameters
    ----------
    boundary : (point, direction)
        The point ``(x; eta)`` the sequence accumulates at.  It must not lie
        in the dual region itself (the complement of the flipped cone).
    gamma : ConeSet
        Closed cone; the sequence lives in the complement of ``flip(gamma)``.
    M_max : int
        Number of terms, at least 1.
    n : int, optional
        Dimension; inferred from ``grid``.
    grid : Grid
        Points are snapped to this grid so translations are exact.
    layout : {"cluster", "spread"}, optional
        Spatial placement for ``n = 2``.  ``"cluster"`` puts every
        ``x_m`` at ``x``; ``"spread"`` puts them on a ring of radius
        ``spread_radius`` around ``x`` so each term can be observed on its
        own.  In 1D the points always approach ``x`` geometrically.
        Defaults to ``"spread"`` in 2D.
    ratio : float
        Contraction factor, below 1/2: ``|x_{m+1} - x| = ratio |x_m - x|``
        in 1D and ``|eta_{m+1} - eta| = ratio * rho_m`` in 2D.
    first_offset : float
        ``|x_1 - x|`` in 1D, ``|eta_1 - eta|`` in 2D; below 1.
    spread_radius : float, optional
        Ring radius for the ``"spread"`` layout, default ``0.4375`` times the
        box half-width.
    """
    if M_max < 1:
        raise ValueError("M_max must be at least 1")
    n = grid.n if n is None else n
    if n != grid.n or gamma.n != n:
        raise ValueError("dimension mismatch between boundary, gamma and grid")
    if not (0 < ratio < 0.5):
        raise ValueError("ratio must lie in (0, 1/2)")
    if not (0 < first_offset < 1):
        raise ValueError("first_offset must lie in (0, 1)")
    x = np.asarray(boundary[0], float).reshape(-1)
    eta = np.asarray(boundary[1], float).reshape(-1)
    eta = eta / np.linalg.norm(eta)
    if in_dual_region(gamma, x, eta):
        raise ValueError("the boundary point lies inside the dual region, not on its boundary")
    omega = grid.box
    point_radius = 0.25 * min(grid.spacing)

    if n == 1:
        for side in (1.0, -1.0):
            xs = [grid.snap(x + side * first_offset * ratio ** (m - 1)) for m in range(1, M_max + 1)]
            if all(in_dual_region(gamma, xm, eta) for xm in xs):
                break
        else:
            raise ValueError(f"no admissible point x_m near x = {x} on either side at sampled resolution")
        terms = tuple(SequenceTerm(tuple(map(float, xm)), tuple(map(float, eta)), 3.0**-m) for m, xm in enumerate(xs, 1))
        plan = SequencePlan(1, tuple(map(float, x)), tuple(map(float, eta)), terms, gamma, omega, point_radius)
    else:
        layout = layout or "spread"
        if layout == "cluster":
            xs = [x.copy() for _ in range(M_max)]
        elif layout == "spread":
            R = spread_radius if spread_radius is not None else 0.4375 * float(np.min(omega.lengths)) / 2
            xs = [
                grid.snap(x + R * np.array([np.cos(2 * np.pi * (m - 1) / M_max), np.sin(2 * np.pi * (m - 1) / M_max)]))
                for m in range(1, M_max + 1)
            ]
        else:
            raise ValueError(f"unknown layout {layout!r}")
        terms = None
        for side in (1.0, -1.0):
            terms = _direction_sequence(gamma, x, eta, xs, side, ratio, first_offset)
            if terms is not None:
                break
        if terms is None:
            raise ValueError(f"no admissible directions eta_m near eta = {tuple(eta)} at x = {tuple(x)}")
        plan = SequencePlan(2, tuple(map(float, x)), tuple(map(float, eta)), terms, gamma, omega, point_radius)
    bad = plan.check()
    if bad:
        raise ValueError("sequence construction failed: " + "; ".join(bad))
    return plan


def _direction_sequence(gamma, x, eta, xs, side, ratio, first_offset):
    chord = first_offset
    terms = []
    for xm in xs:
        em = _rotate(eta, side * 2 * np.arcsin(chord / 2))
        if not in_dual_region(gamma, xm, em):
            return None
        dist_eta = float(np.linalg.norm(em - eta))
        rho = min(dist_eta, _dist_to_flipped_fiber(gamma, xm, em))
        if not rho > 0:
            return None
        terms.append(SequenceTerm(tuple(map(float, xm)), tuple(map(float, em)), rho))
        chord = ratio * rho
    return tuple(terms)


@dataclass(frozen=True)
class GammaM:
    """Closed cone carrying the tail ``S_p - S_q`` for ``p > q >= M``."""

    M: int
    cone: ConeSet
    points: np.ndarray = field(repr=False)


def gamma_cone(plan: SequencePlan, M: int) -> GammaM:
    """Union over ``i > M`` of ``X_M x cap(eta_i, rho_i/4)`` plus ``X_M x {eta}``.

    ``X_M`` is ``{x_l : l > M}`` together with ``x``; each point is a small
    box of half-width ``plan.point_radius``.
    """
    if not (0 <= M <= plan.M_max):
        raise ValueError(f"M must lie in [0, {plan.M_max}]")
    pts = [np.asarray(t.x) for t in plan.terms[M:]] + [np.asarray(plan.x)]
    uniq = []
    for p in pts:
        if not any(np.array_equal(p, q) for q in uniq):
            uniq.append(p)
    h = plan.point_radius
    patches = []
    for p in uniq:
        region = Box(tuple(p - h), tuple(p + h))
        for t in plan.terms[M:]:
            patches.append(ConePatch(region, t.eta, t.rho / 4))
        patches.append(ConePatch(region, plan.eta, 0.0))
    cone = ConeSet(plan.n, tuple(patches), closed=True)
    if plan.n > 1:
        tail = plan.terms[M:]
        for a in range(len(tail)):
            for b in range(a + 1, len(tail)):
                gap = np.linalg.norm(np.asarray(tail[a].eta) - np.asarray(tail[b].eta))
                if not gap > (tail[a].rho + tail[b].rho) / 4:
                    raise ValueError(f"caps of eta_{M + a + 1} and eta_{M + b + 1} overlap")
    for i, t in enumerate(plan.terms[:M], 1):
        if member(cone, t.x, t.eta):
            raise ValueError(f"(x_{i}; eta_{i}) falls inside Gamma_{M}")
    return GammaM(M, cone, np.array(uniq))


@lru_cache(maxsize=4)
def _terms_cached(plan: SequencePlan, grid: Grid, rho: float) -> tuple[SampledField, ...]:
    chi = make_window(np.zeros(grid.n), plan.delta / 4, grid)
    out = []
    for m, t in enumerate(plan.terms, 1):
        params = HormanderParams(t.eta, float(m), rho)
        out.append(build_vm(params, t.x, chi, plan.delta))
    return tuple(out)


def build_terms(plan: SequencePlan, grid: Grid, rho: float = 0.5) -> tuple[SampledField, ...]:
    """The fields ``v_1, ..., v_{M_max}``; the window radius is ``delta/4``."""
    return _terms_cached(plan, grid, float(rho))


def partial_sum(plan: SequencePlan, m: int, grid: Grid, rho: float = 0.5) -> SampledField:
    """``S_m = sum_{k=1}^m v_k / k!`` summed in index order."""
    if not (0 <= m <= plan.M_max):
        raise ValueError(f"m must lie in [0, {plan.M_max}]")
    S = SampledField.zeros(grid)
    fact = 1.0
    for k, v in enumerate(build_terms(plan, grid, rho)[:m], 1):
        fact *= k
        S = S + v / fact
    return S


def log_envelope(q: int, p: int) -> float:
    """``log(sum_{k=q+1}^p 10^k / k!)``; ``-inf`` when ``p <= q``."""
    if p <= q:
        return float("-inf")
    logs = np.array([k * log(10.0) - lgamma(k + 1) for k in range(q + 1, p + 1)])
    top = logs.max()
    return float(top + np.log(np.sum(np.exp(logs - top))))


@dataclass(frozen=True)
class CauchyRow:
    spec: int
    p: int
    q: int
    measured: float
    envelope: float
    ratio: float


@dataclass(frozen=True)
class CauchyReport:
    """Seminorms of ``S_p - S_q`` against ``C * sum_{k=q+1}^p 10^k/k!``.

    ``constants[i]`` is fitted on the pair with the smallest ``(q, p)`` for
    spec ``i``; ``dominated`` says every ratio is at most 1.
    """

    M: int
    rows: tuple[CauchyRow, ...]
    constants: tuple[float, ...]
    dominated: bool
    monotone: bool

    def to_csv(self) -> str:
        lines = ["spec,p,q,measured,envelope,ratio"]
        for r in self.rows:
            lines.append(f"{r.spec},{r.p},{r.q},{r.measured:.17g},{r.envelope:.17g},{r.ratio:.17g}")
        return "\n".join(lines) + "\n"


def cauchy_rates(
    plan: SequencePlan,
    specs: list[SeminormSpec],
    pairs: list[tuple[int, int]],
    grid: Grid | None = None,
    M: int | None = None,
    rho: float = 0.5,
) -> CauchyReport:
    """Measured Cauchy rates of the partial sums in seminorms admissible for ``Gamma_M``.

    ``M`` defaults to the smallest ``q`` among the pairs and ``grid`` to
    :func:`counterexample_grid`.  Raises ``ValueError`` if a spec's
    ``supp chi x V`` meets ``Gamma_M`` or if a pair has ``q < M``.
    """
    if not pairs:
        raise ValueError("no (p, q) pairs given")
    grid = counterexample_grid(plan.n) if grid is None else grid
    M = min(q for _, q in pairs) if M is None else M
    gM = gamma_cone(plan, M).cone
    for i, spec in enumerate(specs):
        bad = spec.violation(gM)
        if bad is not None:
            raise ValueError(f"spec {i} meets Gamma_{M} at x={bad[0]}, eta={bad[1]}")
    for p, q in pairs:
        if q < M or p > plan.M_max or p < q:
            raise ValueError(f"pair (p={p}, q={q}) must satisfy M <= q <= p <= M_max")
    sums = {m: partial_sum(plan, m, grid, rho) for m in sorted({a for pq in pairs for a in pq})}
    strict = sorted((q, p) for p, q in pairs if p > q)
    rows = []
    constants = []
    dominated = True
    monotone = True
    for i, spec in enumerate(specs):
        measured = {}
        for p, q in pairs:
            measured[(p, q)] = 0.0 if p == q else eval_seminorm(sums[p] - sums[q], spec).value
        if strict:
            q0, p0 = strict[0]
            C = measured[(p0, q0)] / np.exp(log_envelope(q0, p0))
        else:
            C = 0.0
        constants.append(float(C))
        for p, q in pairs:
            env = 0.0 if p == q else float(np.exp(log_envelope(q, p)))
            meas = measured[(p, q)]
            if env == 0.0:
                ratio = 0.0
            elif C == 0.0:
                ratio = 0.0 if meas == 0.0 else float("inf")
            else:
                ratio = meas / (C * env)
            dominated &= ratio <= 1 + 1e-9
            rows.append(CauchyRow(i, p, q, meas, env, float(ratio)))
        top = max(p for p, _ in pairs)
        seq = [measured[(top, q)] for q in sorted({q for p, q in pairs if p == top})]
        monotone &= all(b <= a * (1 + 1e-9) for a, b in zip(seq, seq[1:]))
    return CauchyReport(M, tuple(rows), tuple(constants), bool(dominated), bool(monotone))


@dataclass(frozen=True)
class PersistenceRow:
    m: int
    exponent_sum: float
    exponent_term: float
    window_radius: float


def singularity_persistence(
    plan: SequencePlan,
    grid: Grid,
    rho: float = 0.5,
    *,
    orders=None,
    window: str = "gauss",
    fit_range: tuple[float, float | None] = (32.0, None),
    window_scale: float = 32.0,
) -> tuple[PersistenceRow, ...]:
    """Decay exponent at ``(x_m; eta_m)`` of ``S_{M_max}`` and of ``v_m/m!`` alone.

    The window at ``x_m`` has plateau radius ``plan.measurement_radius(m)``.
    A Gaussian-core window and a fit starting at 32 are the defaults: the
    window's own transform then falls off fast enough not to mask orders
    up to 5 at the default resolution.  The fit never starts below
    ``window_scale / r``, past the spectral bulk of a window of radius ``r``.
    """
    orders = range(1, plan.M_max) if orders is None else orders
    S = partial_sum(plan, plan.M_max, grid, rho)
    terms = build_terms(plan, grid, rho)
    rows = []
    fact = 1.0
    facts = {}
    for k in range(1, plan.M_max + 1):
        fact *= k
        facts[k] = fact
    for m in orders:
        t = plan.terms[m - 1]
        r = plan.measurement_radius(m)
        lo = max(fit_range[0], window_scale / r)
        kw = dict(window=window, fit_range=(lo, fit_range[1]), lambda_min=lo)
        e_sum = decay_profile(S, t.x, t.eta, r, **kw).fitted_exponent
        e_term = decay_profile(terms[m - 1] / facts[m], t.x, t.eta, r, **kw).fitted_exponent
        rows.append(PersistenceRow(m, e_sum, e_term, r))
    return tuple(rows)


def tail_integral(n: int, N: float) -> float:
    """``(2 pi)^(-n) * integral over R^n of (1+|k|)^(-N) dk`` by radial quadrature."""
    from .pairing import tail_integral as _ti

    return _ti(n, N)


@dataclass(frozen=True)
class Step2Report:
    """``|<S_m, f>|`` against ``C_n I_n^{n+1} sum_{k<=m} 10^k/k!`` and the ``e^10`` cap."""

    C_n: float
    I: float
    pairings: tuple[float, ...]
    bounds: tuple[float, ...]
    cap: float
    holds: bool


def step2_bound(plan: SequencePlan, f: SampledField, grid: Grid, rho: float = 0.5) -> Step2Report:
    """Weak bound on the partial sums tested against ``f``.

    ``C_n = (4(n+1) beta)^n |K| pi_{2n,K}(chi) pi_{2n,K'}(f)`` with ``K`` the
    support box of the term window and ``K'`` that of ``f``.
    """
    n = grid.n
    chi = make_window(np.zeros(n), plan.delta / 4, grid)
    K = chi.support_box
    Kf = f.support_box
    C_n = (4 * (n + 1) * BETA) ** n * K.volume * deriv_sup_norm(chi, 2 * n, K).value * deriv_sup_norm(f, 2 * n, Kf).value
    I = tail_integral(n, n + 1)
    pairings = []
    bounds = []
    for m in range(1, plan.M_max + 1):
        S = partial_sum(plan, m, grid, rho)
        pairings.append(float(abs(np.sum(S.values * f.values) * grid.cell_volume)))
        bounds.append(float(C_n * I * np.exp(log_envelope(0, m))))
    cap = float(C_n * I * np.exp(10.0))
    holds = all(a <= b for a, b in zip(pairings, bounds)) and all(b <= cap for b in bounds)
    return Step2Report(float(C_n), float(I), tuple(pairings), tuple(bounds), cap, bool(holds))
