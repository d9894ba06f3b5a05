"""Duality pairing of sampled fields, computed directly and piece by piece.

The direct pairing is the lattice version of

    <u, v> = (2 pi)^(-n) * integral of (u phi)^(k) v^(-k) dk

with ``phi`` equal to 1 near the support of ``v``.  The split version
covers a compact box by windows ``psi_j`` with ``sum psi_j**2 = 1`` and, on
each window, cuts frequency space with degree-0 homogeneous cutoffs
``alpha_j`` and ``beta_j`` that separate the directions carried by ``u``
from those carried by ``v``.  Inserting
``1 = (alpha + (1 - alpha)) (beta + (1 - beta))`` gives four integrals per
window whose sum reproduces the direct pairing, and whose sizes are
controlled by the bound evaluated in :func:`eval_eq3_bound`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .cones import (
    TWO_PI,
    ConePatch,
    ConeSet,
    _angle,
    _half_width,
    cap_distance,
    member,
    sample_directions,
)
from .grid import Box, Bump, Grid, SampledField, SpectralField, dft_forward, dft_forward_reflected, dft_inverse

__all__ = [
    "AngularCutoff",
    "PartitionPiece",
    "ConicPartition",
    "SplitPairingReport",
    "PieceBound",
    "PairingBound",
    "pair_direct",
    "pair_space_oracle",
    "tail_integral",
    "build_conic_partition",
    "pair_split",
    "spectral_order",
    "eval_eq3_bound",
]

DEFAULT_MARGIN = 0.05
UNITY_TOL = 1e-10


def _complex_json(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _phi_covers(phi: SampledField, v: SampledField, tol: float = 1e-12) -> bool:
    where = np.abs(v.values) > 0
    if v.support_box != v.grid.box:
        where |= v.support_box.contains(v.grid.points, tol=1e-9)
    return bool(np.all(np.abs(phi.values[where] - 1) <= tol))


def pair_direct(u: SampledField, v: SampledField, phi: SampledField | None = None) -> complex:
    """``(2 pi)^(-n) sum_k dft(u phi)(k) dft(v)(-k) dk`` over the lattice.

    Parameters
    ----------
    u, v : SampledField
        Fields on the same grid.
    phi : SampledField, optional
        Cutoff equal to 1 on the support of ``v``; defaults to the constant 1.

    Raises
    ------
    ValueError
        If ``phi`` is not 1 wherever ``v`` may be nonzero.
    """
    if u.grid != v.grid:
        raise ValueError("u and v live on different grids")
    grid = u.grid
    if phi is None:
        phi = SampledField(grid, np.ones(grid.shape))
    elif phi.grid != grid:
        raise ValueError("phi lives on a different grid")
    if not _phi_covers(phi, v):
        raise ValueError("phi is not identically 1 on the support of v")
    a = dft_forward(u * phi).values
    b = dft_forward_reflected(v)
    return complex(np.sum(a * b) * grid.dual_cell_volume / (2 * np.pi) ** grid.n)


def pair_space_oracle(u: SampledField, v: SampledField) -> complex:
    """Riemann sum ``sum_x u(x) v(x) dx``."""
    if u.grid != v.grid:
        raise ValueError("u and v live on different grids")
    return complex(np.sum(u.values * v.values) * u.grid.cell_volume)


@lru_cache(maxsize=None)
def tail_integral(n: int, N: float) -> float:
    """``(2 pi)^(-n) * integral over R^n of (1 + |k|)^(-N) dk``.

    Evaluated by adaptive radial quadrature; finite only for ``N > n``.
    """
    if n not in (1, 2):
        raise ValueError(f"only dimensions 1 and 2 are supported, got {n}")
    if not N > n:
        raise ValueError(f"the integral diverges unless N > n (got N={N}, n={n})")
    sphere = 2.0 if n == 1 else TWO_PI
    val, _ = integrate.quad(lambda r: r ** (n - 1) * (1 + r) ** (-N), 0, np.inf, epsabs=0, epsrel=1e-12, limit=200)
    return float(sphere * val / (2 * np.pi) ** n)


# -- homogeneous cutoffs -------------------------------------------------------


@dataclass(frozen=True)
class AngularCutoff:
    """Degree-0 homogeneous function, 1 on a union of caps and 0 far from it.

    The value at ``k`` is a smooth ramp of the chord distance from ``k/|k|``
    to the caps: 1 at distance 0, 0 from distance ``width`` on.  It is 0 at
    the origin and everywhere when there are no caps.
    """

    n: int
    centers: tuple[tuple[float, ...], ...]
    radii: tuple[float, ...]
    width: float

    def __call__(self, k) -> np.ndarray:
        k = np.asarray(k, float)
        r = np.sqrt(np.sum(k**2, axis=-1))
        out = np.zeros(r.shape)
        if not self.centers:
            return out
        nz = r > 0
        dirs = k[nz] / r[nz][..., None]
        d = np.min(
            np.stack([cap_distance(dirs, np.asarray(c), rad) for c, rad in zip(self.centers, self.radii)], axis=-1),
            axis=-1,
        )
        out[nz] = Bump(0.0, self.width)(d)
        return out

    def support_arcs(self) -> list[tuple[float, float]]:
        """Support as ``(center angle, half-width)`` arcs (2D)."""
        grow = 2 * np.arcsin(min(self.width / 2, 1.0))
        return [
            (float(_angle(np.asarray(c))), float(min(_half_width(rad) + grow, np.pi)))
            for c, rad in zip(self.centers, self.radii)
        ]

    def to_dict(self) -> dict:
        return {"centers": [list(c) for c in self.centers], "radii": list(self.radii), "width": self.width}


def _caps_of(cone: ConeSet, box: Box) -> tuple[tuple[tuple[float, ...], ...], tuple[float, ...]]:
    """Caps of the patches whose regions meet ``box``."""
    cs, rs = [], []
    for p in cone.patches:
        lo, hi = np.asarray(p.region.lo), np.asarray(p.region.hi)
        if np.all(lo <= np.asarray(box.hi) + 1e-12) and np.all(hi >= np.asarray(box.lo) - 1e-12):
            cs.append(p.cap_center)
            rs.append(p.cap_radius)
    return tuple(cs), tuple(rs)


def _caps_gap(n: int, caps_a, caps_b, grow: float = 0.0) -> float:
    """Chord gap between the caps ``a`` and the negatives of the caps ``b``.

    Every cap is first widened by ``grow`` (a chord length).  Returns 2 when
    either side is empty.
    """
    ca, ra = caps_a
    cb, rb = caps_b
    if not ca or not cb:
        return 2.0
    if n == 1:
        sa = {d for d in (1.0, -1.0) for c, r in zip(ca, ra) if abs(d - c[0]) <= r + 1e-12}
        sb = {-d for d in (1.0, -1.0) for c, r in zip(cb, rb) if abs(d - c[0]) <= r + 1e-12}
        return 0.0 if sa & sb else 2.0
    g = 2 * np.arcsin(min(grow / 2, 1.0))
    best = np.pi
    for c1, r1 in zip(ca, ra):
        a1, h1 = _angle(np.asarray(c1)), min(_half_width(r1) + g, np.pi)
        for c2, r2 in zip(cb, rb):
            a2, h2 = _angle(-np.asarray(c2)), min(_half_width(r2) + g, np.pi)
            delta = abs(np.mod(a1 - a2 + np.pi, TWO_PI) - np.pi)
            best = min(best, max(delta - h1 - h2, 0.0))
    return float(2 * np.sin(best / 2))


# -- partition -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PartitionPiece:
    """One window of a conic partition with its direction cones and cutoffs."""

    psi: SampledField = field(repr=False)
    box: Box
    V_u: ConeSet
    V_v: ConeSet
    alpha: AngularCutoff
    beta: AngularCutoff
    gap: float

    def to_dict(self) -> dict:
        return {
            "box": self.box.to_dict(),
            "V_u": self.V_u.to_dict(),
            "V_v": self.V_v.to_dict(),
            "alpha": self.alpha.to_dict(),
            "beta": self.beta.to_dict(),
            "gap": self.gap,
        }


@dataclass(frozen=True, eq=False)
class ConicPartition:
    """Windows with ``sum psi_j**2 = 1`` on ``K`` plus separating cones.

    Attributes
    ----------
    K : Box
    pieces : tuple of PartitionPiece
    margin : float
        Required chord gap between ``V_u`` and ``-V_v`` on every piece.
    spacing : float
        Smallest window plateau radius used.
    """

    K: Box
    pieces: tuple[PartitionPiece, ...]
    margin: float
    spacing: float

    @property
    def grid(self) -> Grid:
        return self.pieces[0].psi.grid

    @property
    def phi(self) -> SampledField:
        """``sum_j psi_j**2``."""
        grid = self.grid
        total = np.zeros(grid.shape)
        for p in self.pieces:
            total = total + np.real(p.psi.values) ** 2
        return SampledField(grid, total)

    def unity_deviation(self) -> float:
        """Largest ``|sum psi_j**2 - 1|`` over lattice points of ``K``."""
        grid = self.grid
        inK = self.K.contains(grid.points)
        if not np.any(inK):
            return 0.0
        return float(np.max(np.abs(np.real(self.phi.values[inK]) - 1)))

    def to_dict(self) -> dict:
        return {
            "K": self.K.to_dict(),
            "margin": self.margin,
            "spacing": self.spacing,
            "unity_deviation": self.unity_deviation(),
            "pieces": [p.to_dict() for p in self.pieces],
        }


def _split(cell: Box) -> list[Box]:
    """The 2**n halves of a box."""
    mids = cell.center
    parts = [[(lo, m), (m, hi)] for lo, m, hi in zip(cell.lo, mids, cell.hi)]
    out = []
    for combo in np.array(np.meshgrid(*[[0, 1]] * cell.n, indexing="ij")).reshape(cell.n, -1).T:
        lo = tuple(parts[i][c][0] for i, c in enumerate(combo))
        hi = tuple(parts[i][c][1] for i, c in enumerate(combo))
        out.append(Box(lo, hi))
    return out


def _reach(cell: Box) -> float:
    """Plateau radius of the window of a cell: its half-diagonal."""
    return float(np.linalg.norm(cell.lengths) / 2)


def _existence_witness(gamma: ConeSet, wf_v: ConeSet, K: Box, grid: Grid):
    """A sampled ``(x, xi)`` with ``(x; -xi)`` in gamma and ``(x; xi)`` in wf_v, or None."""
    if not gamma.patches or not wf_v.patches:
        return None
    pts = []
    for p in wf_v.patches:
        reg = p.region.intersect(K.expand(1e-9))
        if reg is not None:
            pts.append(reg.center)
            pts.extend(np.array(np.meshgrid(*zip(reg.lo, reg.hi), indexing="ij")).reshape(K.n, -1).T)
    stride = tuple(max(1, s // 64) for s in grid.shape)
    sub = grid.points[tuple(slice(None, None, s) for s in stride)].reshape(-1, K.n)
    pts.extend(sub[K.contains(sub)])
    pts = np.asarray(pts, float).reshape(-1, K.n)
    dirs = sample_directions(K.n, 720)
    extra = [np.asarray(p.cap_center) for p in wf_v.patches] + [-np.asarray(p.cap_center) for p in gamma.patches]
    dirs = np.concatenate([dirs, np.asarray(extra).reshape(-1, K.n)])
    hit = member(gamma, pts[:, None, :], -dirs[None, :, :]) & member(wf_v, pts[:, None, :], dirs[None, :, :])
    if np.any(hit):
        i, j = np.argwhere(hit)[0]
        return tuple(map(float, pts[i])), tuple(map(float, dirs[j]))
    return None


def build_conic_partition(
    gamma: ConeSet,
    wf_v: ConeSet,
    K: Box,
    piece_budget: int = 256,
    *,
    grid: Grid | None = None,
    margin: float = DEFAULT_MARGIN,
) -> ConicPartition:
    """Cover ``K`` by windows and separate the directions of ``gamma`` and ``wf_v``.

    On each window ``V_u`` collects the caps of ``gamma`` over its support
    and ``V_v`` those of ``wf_v``, so both covering conditions hold by
    construction.  Windows sit on the cells of an adaptive subdivision of
    ``K``; a cell is halved along every axis until ``V_u`` and ``-V_v`` are
    at least ``margin`` apart over its window, and the windows are then
    normalized so their squares sum to 1 on ``K``.

    Parameters
    ----------
    gamma : ConeSet
        Closed cone carried by ``u``.
    wf_v : ConeSet
        Closed cone containing the singular directions of ``v``.
    K : Box
        Where ``sum psi_j**2 = 1`` must hold.
    piece_budget : int
        Largest number of windows tried.
    grid : Grid, optional
        Sampling grid, default ``Grid.default(n)``.
    margin : float
        Chord gap required between ``V_u`` and ``-V_v``.

    Raises
    ------
    ValueError
        If some ``(x; xi)`` has ``(x; -xi)`` in gamma and ``(x; xi)`` in
        ``wf_v``, or if no separation is found within the budget.
    """
    n = K.n
    grid = Grid.default(n) if grid is None else grid
    if gamma.n != n or wf_v.n != n or grid.n != n:
        raise ValueError("dimension mismatch")
    if not (0 < margin < 2):
        raise ValueError("margin must lie in (0, 2)")
    witness = _existence_witness(gamma, wf_v, K, grid)
    if witness is not None:
        raise ValueError(f"flip(gamma) meets wf_v at x={witness[0]}, xi={witness[1]}")
    width = margin / 4
    min_cell = 4 * max(grid.spacing)
    cells = [K]
    done: list[tuple[Box, tuple, tuple]] = []
    while cells:
        if len(done) + len(cells) > piece_budget:
            c = cells[0].center
            raise ValueError(f"no cone separation within {piece_budget} pieces; unresolved near x={tuple(map(float, c))}")
        pending = []
        for cell in cells:
            r = _reach(cell)
            reach = Box(tuple(cell.center - 2 * r), tuple(cell.center + 2 * r))
            cu, cv = _caps_of(gamma, reach), _caps_of(wf_v, reach)
            if _caps_gap(n, cu, cv) >= margin:
                done.append((cell, cu, cv))
            elif np.min(cell.lengths) / 2 < min_cell:
                c = tuple(map(float, cell.center))
                raise ValueError(f"no cone separation at grid resolution near x={c}")
            else:
                pending.extend(_split(cell))
        cells = pending
    return _assemble(grid, K, done, margin, width)


def _assemble(grid, K, cells, margin, width) -> ConicPartition:
    n = K.n
    pts = grid.points
    reaches = [_reach(c) for c, _, _ in cells]
    t = 0.5 * min(reaches)
    outer = K.expand(t)
    if not grid.box.contains_box(K.expand(2 * max(reaches)), tol=1e-9):
        raise ValueError("windows around K escape the grid box")
    ramp = Bump(0.0, t)
    theta = np.ones(grid.shape)
    for i in range(n):
        d = np.maximum(np.maximum(K.lo[i] - pts[..., i], pts[..., i] - K.hi[i]), 0.0)
        theta = theta * ramp(d)
    ws = [Bump(r, 2 * r)(np.sqrt(np.sum((pts - c.center) ** 2, axis=-1))) for (c, _, _), r in zip(cells, reaches)]
    total = np.sum([w**2 for w in ws], axis=0)
    inK = K.contains(pts)
    if np.any(inK) and np.min(total[inK]) < 0.25:
        raise ValueError("windows do not cover K")
    live = theta > 0
    if np.any(total[live] <= 0):
        raise ValueError("windows leave a gap inside the cutoff")
    norm = np.zeros(grid.shape)
    norm[live] = theta[live] / np.sqrt(total[live])
    pieces = []
    for w, (cell, cu, cv), r in zip(ws, cells, reaches):
        psi = w * norm
        if not np.any(psi > 0):
            continue
        b = Box(tuple(cell.center - 2 * r), tuple(cell.center + 2 * r)).intersect(outer)
        V_u = ConeSet(n, tuple(ConePatch(b, c, rad) for c, rad in zip(*cu)))
        V_v = ConeSet(n, tuple(ConePatch(b, c, rad) for c, rad in zip(*cv)))
        pieces.append(
            PartitionPiece(
                SampledField.masked(grid, psi, b),
                b,
                V_u,
                V_v,
                AngularCutoff(n, cu[0], cu[1], width),
                AngularCutoff(n, cv[0], cv[1], width),
                _caps_gap(n, cu, cv),
            )
        )
    part = ConicPartition(K, tuple(pieces), margin, min(reaches))
    dev = part.unity_deviation()
    if dev > UNITY_TOL:
        raise ValueError(f"sum of squared windows deviates from 1 on K by {dev:.3g}")
    return part


# -- split pairing -------------------------------------------------------------


@dataclass(frozen=True)
class SplitPairingReport:
    """Per-window integrals ``I1..I4`` with their total and the direct value."""

    pieces: tuple[tuple[complex, complex, complex, complex], ...]
    total: complex
    direct: complex
    discrepancy: float

    @property
    def relative_discrepancy(self) -> float:
        scale = max(abs(self.direct), abs(self.total))
        return 0.0 if scale == 0 else self.discrepancy / scale

    def to_dict(self) -> dict:
        return {
            "pieces": [
                {f"I{i + 1}": _complex_json(z) for i, z in enumerate(piece)} for piece in self.pieces
            ],
            "total": _complex_json(self.total),
            "direct": _complex_json(self.direct),
            "discrepancy": self.discrepancy,
            "relative_discrepancy": self.relative_discrepancy,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _check_partition(partition: ConicPartition, v: SampledField):
    if partition.grid != v.grid:
        raise ValueError("partition and fields live on different grids")
    dev = partition.unity_deviation()
    if dev > UNITY_TOL:
        raise ValueError(f"partition of unity deviates by {dev:.3g} on K")
    nz = np.abs(v.values) > 0
    if np.any(nz & ~partition.K.contains(v.grid.points, tol=1e-9)):
        raise ValueError("v is not supported inside the partition's K")
    for j, p in enumerate(partition.pieces):
        if p.gap <= 0:
            raise ValueError(f"piece {j}: V_u meets -V_v")


def pair_split(u: SampledField, v: SampledField, partition: ConicPartition) -> SplitPairingReport:
    """Pairing as ``sum_j (I1 + I2 + I3 + I4)`` over the windows of ``partition``.

    Each integral uses ``alpha_j(-k)`` or ``1 - alpha_j(-k)`` against
    ``(psi_j u)^(-k)`` and ``beta_j(k)`` or ``1 - beta_j(k)`` against
    ``(psi_j v)^(k)``.  ``I1`` vanishes identically because the supports of
    ``alpha_j(-.)`` and ``beta_j`` are disjoint.
    """
    if u.grid != v.grid:
        raise ValueError("u and v live on different grids")
    _check_partition(partition, v)
    grid = u.grid
    w = grid.dual_cell_volume / (2 * np.pi) ** grid.n
    k = grid.freqs
    rows = []
    for j, p in enumerate(partition.pieces):
        a_neg = p.alpha(-k)
        b = p.beta(k)
        uh = dft_forward_reflected(u * p.psi)
        vh = dft_forward(v * p.psi).values
        prod = uh * vh
        I1 = complex(np.sum(a_neg * b * prod) * w)
        I2 = complex(np.sum(a_neg * (1 - b) * prod) * w)
        I3 = complex(np.sum((1 - a_neg) * b * prod) * w)
        I4 = complex(np.sum((1 - a_neg) * (1 - b) * prod) * w)
        if abs(I1) > 1e-14:
            raise ValueError(f"piece {j}: I1 = {I1} should vanish")
        rows.append((I1, I2, I3, I4))
    total = complex(sum(sum(r) for r in rows))
    direct = pair_direct(u, v, partition.phi)
    return SplitPairingReport(tuple(rows), total, direct, float(abs(total - direct)))


# -- bound ---------------------------------------------------------------------


def spectral_order(spectrum: np.ndarray, freq_norm: np.ndarray, k_max: float) -> tuple[int, float]:
    """Least ``m >= 0`` at which ``(1+|k|)^(-m) |spectrum|`` peaks below ``k_max/2``.

    Returns ``(m, C)`` with ``C`` the lattice sup of the weighted spectrum.
    """
    mag = np.abs(spectrum)
    inner = freq_norm < k_max / 2
    for m in range(0, 64):
        weighted = mag * (1 + freq_norm) ** (-m)
        if np.max(weighted[~inner], initial=0.0) <= np.max(weighted[inner], initial=0.0):
            return m, float(np.max(weighted))
    raise ValueError("spectrum grows too fast to assign an order")


@dataclass(frozen=True)
class PieceBound:
    p_term: float
    tail_term: float
    cross_term: float
    u_norm: float
    v_norm: float
    C: float
    m: int


@dataclass(frozen=True)
class PairingBound:
    """Right-hand side of the pairing bound, term by term.

    ``rhs_total`` is ``sum_j (p_j + ||u||_M C I^(M-m) + ||u||_M ||v||_N I^(N+M))``
    and ``holds`` compares it with ``|<u, v>|``.
    """

    pieces: tuple[PieceBound, ...]
    rhs_total: float
    lhs: float
    holds: bool
    N: int
    M: int
    m: int
    constants: dict

    @property
    def slack(self) -> float:
        return float("inf") if self.lhs == 0 else self.rhs_total / self.lhs

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "M": self.M,
            "m": self.m,
            "rhs_total": self.rhs_total,
            "lhs": self.lhs,
            "holds": self.holds,
            "slack": None if self.lhs == 0 else self.slack,
            "constants": self.constants,
            "pieces": [p.__dict__ for p in self.pieces],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def eval_eq3_bound(u: SampledField, v: SampledField, partition: ConicPartition, N: int, M: int) -> PairingBound:
    """Evaluate every term of the pairing bound for the given decay orders.

    ``||u||_M`` is the lattice sup of ``(1+|k|)^M |(psi_j u)^(k)|`` where
    ``alpha_j(k) < 1``; ``||v||_N`` likewise with ``beta_j``.  The order
    ``m`` and constant ``C`` of ``psi_j v`` come from
    :func:`spectral_order`.

    Raises
    ------
    ValueError
        Unless ``N + M > n`` and ``M > n + m`` for every window.
    """
    if u.grid != v.grid:
        raise ValueError("u and v live on different grids")
    _check_partition(partition, v)
    grid = u.grid
    n = grid.n
    k = grid.freqs
    kn = grid.freq_norm
    spectra = []
    m_all = 0
    for p in partition.pieces:
        vh = dft_forward(v * p.psi).values
        m, C = spectral_order(vh, kn, grid.k_max)
        m_all = max(m_all, m)
        spectra.append((vh, m, C))
    if not (N + M > n and M > n + m_all):
        raise ValueError(f"order conditions unmet: need N + M > {n} and M > {n + m_all} (got N={N}, M={M})")
    I_cross = tail_integral(n, N + M)
    rows = []
    for p, (vh, m, C) in zip(partition.pieces, spectra):
        uh = dft_forward(u * p.psi).values
        a = p.alpha(k)
        b = p.beta(k)
        u_norm = float(np.max(np.abs(uh[a < 1]) * (1 + kn[a < 1]) ** M, initial=0.0))
        v_norm = float(np.max(np.abs(vh[b < 1]) * (1 + kn[b < 1]) ** N, initial=0.0))
        # p-term: |<u, psi_j f_j>| with f_j^(k) = alpha_j(-k) (1 - beta_j(k)) (psi_j v)^(k)
        f_hat = p.alpha(-k) * (1 - b) * vh
        f = dft_inverse(SpectralField(grid, f_hat))
        p_term = abs(np.sum(u.values * p.psi.values * f.values) * grid.cell_volume)
        tail = u_norm * C * tail_integral(n, M - m)
        cross = u_norm * v_norm * I_cross
        rows.append(PieceBound(float(p_term), float(tail), float(cross), u_norm, v_norm, C, m))
    rhs = float(sum(r.p_term + r.tail_term + r.cross_term for r in rows))
    lhs = abs(pair_direct(u, v, partition.phi))
    constants = {f"I_{n}^{N + M}": I_cross}
    for r in rows:
        constants[f"I_{n}^{M - r.m}"] = tail_integral(n, M - r.m)
    return PairingBound(tuple(rows), rhs, float(lhs), bool(rhs >= lhs), N, M, m_all, constants)
