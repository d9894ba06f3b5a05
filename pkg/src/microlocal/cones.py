"""Conic subsets of the punctured cotangent bundle over a box.

A cone is stored as a finite union of patches ``region x cap`` where the
region is a spatial box and the cap is a ball on the unit sphere of
directions (Euclidean chord radius).  Membership only looks at ``k/|k|``,
so every :class:`ConeSet` is conic by construction.

Distances use the product max-metric
``d((x, eta), (y, zeta)) = max(|x - y|, |eta - zeta|)``, for which the
distance to a patch is the larger of the spatial distance to its box and
the chord distance to its cap.

Only dimensions 1 and 2 are supported.  In 1D the sphere is ``{+1, -1}``;
in 2D caps are circular arcs, which makes unions and complements of caps
exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .grid import Box, SampledField

__all__ = [
    "BOUNDARY_TOL",
    "ConePatch",
    "ConeSet",
    "Exhaustion",
    "as_direction",
    "sample_directions",
    "member",
    "flip",
    "complement",
    "in_dual_region",
    "distance",
    "cap_distance",
    "fiber_arcs",
    "exhaustion",
    "disjoint_support_check",
    "support_overlap_witness",
    "cone_to_json",
    "cone_from_json",
]

#: Tolerance separating strict from non-strict boundary comparisons.
BOUNDARY_TOL = 1e-12

TWO_PI = 2 * np.pi


def as_direction(v) -> np.ndarray:
    """Normalize ``v`` to a unit vector."""
    v = np.asarray(v, float).reshape(-1)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ValueError("a direction must be nonzero")
    return v / nrm


def sample_directions(n: int, count: int = 360) -> np.ndarray:
    """Direction sample: ``{+1, -1}`` in 1D, ``count`` equispaced angles in 2D."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        th = TWO_PI * np.arange(count) / count
        return np.stack([np.cos(th), np.sin(th)], axis=-1)
    raise ValueError(f"only dimensions 1 and 2 are supported, got {n}")


@dataclass(frozen=True)
class ConePatch:
    """``region x (R_+ * cap)`` with ``cap = {eta : |eta - cap_center| <= cap_radius}``.

    A radius of 0 encodes a single ray; 2 covers the whole sphere.
    """

    region: Box
    cap_center: tuple[float, ...]
    cap_radius: float

    def __post_init__(self):
        c = np.asarray(self.cap_center, float).reshape(-1)
        nrm = np.linalg.norm(c)
        if nrm == 0:
            raise ValueError("cap_center must be nonzero")
        if abs(nrm - 1.0) > 1e-12:
            c = c / nrm  # unit inputs are kept bit-for-bit so flip stays an exact involution
        if c.size != self.region.n:
            raise ValueError("cap_center and region have different dimensions")
        if not (0.0 <= self.cap_radius <= 2.0):
            raise ValueError(f"cap_radius must lie in [0, 2], got {self.cap_radius}")
        object.__setattr__(self, "cap_center", tuple(float(a) for a in c))
        object.__setattr__(self, "cap_radius", float(self.cap_radius))


@dataclass(frozen=True)
class ConeSet:
    """Finite union of patches; the empty tuple is the empty cone."""

    n: int
    patches: tuple[ConePatch, ...] = ()
    closed: bool = True

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"only dimensions 1 and 2 are supported, got {self.n}")
        patches = tuple(self.patches)
        for p in patches:
            if p.region.n != self.n:
                raise ValueError("patch dimension does not match the cone")
        object.__setattr__(self, "patches", patches)

    @classmethod
    def empty(cls, n: int) -> "ConeSet":
        return cls(n, ())

    @classmethod
    def full(cls, region: Box) -> "ConeSet":
        e = np.zeros(region.n)
        e[0] = 1.0
        return cls(region.n, (ConePatch(region, tuple(e), 2.0), ConePatch(region, tuple(-e), 2.0)))

    def __len__(self):
        return len(self.patches)

    @cached_property
    def _arrays(self):
        P = len(self.patches)
        lo = np.array([p.region.lo for p in self.patches]).reshape(P, self.n)
        hi = np.array([p.region.hi for p in self.patches]).reshape(P, self.n)
        c = np.array([p.cap_center for p in self.patches]).reshape(P, self.n)
        r = np.array([p.cap_radius for p in self.patches]).reshape(P)
        return lo, hi, c, r

    def region_mask(self, x) -> np.ndarray:
        """Boolean array ``(..., P)``: which patch regions contain ``x``."""
        lo, hi, _, _ = self._arrays
        x = np.asarray(x, float)[..., None, :]
        if self.closed:
            ins = (x >= lo - BOUNDARY_TOL) & (x <= hi + BOUNDARY_TOL)
        else:
            ins = (x > lo + BOUNDARY_TOL) & (x < hi - BOUNDARY_TOL)
        return np.all(ins, axis=-1)

    def cap_mask(self, eta) -> np.ndarray:
        """Boolean array ``(..., P)``: which caps contain the direction ``eta``."""
        _, _, c, r = self._arrays
        eta = np.asarray(eta, float)[..., None, :]
        d = np.sqrt(np.sum((eta - c) ** 2, axis=-1))
        if self.closed:
            return d <= r + BOUNDARY_TOL
        return d < r - BOUNDARY_TOL

    def directions_member(self, eta) -> np.ndarray:
        """Whether ``eta`` lies in some cap, ignoring regions."""
        if not self.patches:
            return np.zeros(np.shape(eta)[:-1], bool)
        return np.any(self.cap_mask(eta), axis=-1)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "closed": self.closed,
            "patches": [
                {"region": p.region.to_dict(), "cap_center": list(p.cap_center), "cap_radius": p.cap_radius}
                for p in self.patches
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConeSet":
        patches = tuple(
            ConePatch(Box.from_dict(p["region"]), tuple(p["cap_center"]), float(p["cap_radius"]))
            for p in d["patches"]
        )
        return cls(int(d["n"]), patches, bool(d.get("closed", True)))


def cone_to_json(cone: ConeSet) -> str:
    return json.dumps(cone.to_dict(), indent=2, sort_keys=True) + "\n"


def cone_from_json(text: str) -> ConeSet:
    return ConeSet.from_dict(json.loads(text))


def member(cone: ConeSet, x, eta) -> np.ndarray | bool:
    """Whether ``(x; eta)`` lies in ``cone``.

    ``x`` and ``eta`` broadcast against each other with trailing axis ``n``.
    Scalars are returned for single queries.
    """
    x = np.asarray(x, float)
    eta = np.asarray(eta, float)
    if not cone.patches:
        out = np.zeros(np.broadcast_shapes(x.shape[:-1], eta.shape[:-1]), bool)
    else:
        out = np.any(cone.region_mask(x) & cone.cap_mask(eta), axis=-1)
    return bool(out) if out.ndim == 0 else out


def flip(cone: ConeSet) -> ConeSet:
    """The cone with every direction negated."""
    patches = tuple(ConePatch(p.region, tuple(-np.asarray(p.cap_center)), p.cap_radius) for p in cone.patches)
    return ConeSet(cone.n, patches, cone.closed)


def in_dual_region(gamma: ConeSet, x, eta) -> np.ndarray | bool:
    """Pointwise test of ``(x; eta)`` in the complement of ``flip(gamma)``."""
    res = member(gamma, x, -np.asarray(eta, float))
    return (not res) if isinstance(res, bool) else ~res


# -- circle arithmetic (n = 2) ------------------------------------------------


def _angle(v) -> np.ndarray:
    v = np.asarray(v, float)
    return np.mod(np.arctan2(v[..., 1], v[..., 0]), TWO_PI)


def _half_width(r) -> np.ndarray:
    return 2 * np.arcsin(np.clip(np.asarray(r, float) / 2, 0.0, 1.0))


def _arcs_union(arcs: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Union of closed arcs given as ``(start, length)`` with angles mod 2pi.

    Returns disjoint arcs in the same form, or ``[(0, 2pi)]`` for the whole
    circle.
    """
    pieces = []
    for start, length in arcs:
        if length >= TWO_PI - 1e-15:
            return [(0.0, TWO_PI)]
        s = start % TWO_PI
        e = s + length
        if e > TWO_PI:
            pieces.append((s, TWO_PI))
            pieces.append((0.0, e - TWO_PI))
        else:
            pieces.append((s, e))
    if not pieces:
        return []
    pieces.sort()
    merged = [list(pieces[0])]
    for s, e in pieces[1:]:
        if s <= merged[-1][1] + 1e-15:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    if merged[0][0] <= 1e-15 and merged[-1][1] >= TWO_PI - 1e-15 and len(merged) > 1:
        first = merged.pop(0)
        merged[-1][1] = TWO_PI + first[1]
    out = []
    for s, e in merged:
        if e - s >= TWO_PI - 1e-15:
            return [(0.0, TWO_PI)]
        out.append((s, e - s))
    return out


def _arcs_complement(union: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Open arcs complementary to a disjoint union of closed arcs."""
    if not union:
        return [(0.0, TWO_PI)]
    if union[0][1] >= TWO_PI:
        return []
    ordered = sorted(((s % TWO_PI, length) for s, length in union))
    out = []
    for i, (s, length) in enumerate(ordered):
        end = s + length
        nxt = ordered[(i + 1) % len(ordered)][0]
        if i + 1 == len(ordered):
            nxt += TWO_PI
        gap = nxt - end
        if gap > 0:
            out.append((end % TWO_PI, gap))
    return out


def _arc_to_caps(start: float, length: float) -> list[tuple[np.ndarray, float]]:
    """Caps (center, chord radius) whose union is the arc."""
    if length >= TWO_PI - 1e-15:
        return [(np.array([1.0, 0.0]), 2.0), (np.array([-1.0, 0.0]), 2.0)]
    mid = start + length / 2
    return [(np.array([np.cos(mid), np.sin(mid)]), float(2 * np.sin(length / 4)))]


def fiber_arcs(cone: ConeSet, active: np.ndarray) -> list[tuple[float, float]]:
    """Union of the caps of the active patches as closed arcs (2D only)."""
    if cone.n != 2:
        raise ValueError("arcs are only defined in two dimensions")
    _, _, c, r = cone._arrays
    arcs = []
    for ci, ri in zip(c[active], r[active]):
        h = _half_width(ri)
        arcs.append((float(_angle(ci) - h), float(2 * h)))
    return _arcs_union(arcs)


def _fiber_1d(cone: ConeSet, active: np.ndarray) -> set[float]:
    _, _, c, r = cone._arrays
    dirs = set()
    for d in (1.0, -1.0):
        dist = np.abs(d - c[active, 0])
        if np.any(dist <= r[active] + BOUNDARY_TOL):
            dirs.add(d)
    return dirs


def _breakpoints(cone: ConeSet, omega: Box) -> list[np.ndarray]:
    lo, hi, _, _ = cone._arrays
    cuts = []
    for i in range(omega.n):
        vals = np.concatenate([[omega.lo[i], omega.hi[i]], lo[:, i], hi[:, i]])
        vals = vals[(vals >= omega.lo[i]) & (vals <= omega.hi[i])]
        cuts.append(np.unique(vals))
    return cuts


def _cells(cone: ConeSet, omega: Box):
    """Open cells of the arrangement of patch regions inside ``omega``."""
    cuts = _breakpoints(cone, omega)
    if omega.n == 1:
        for a, b in zip(cuts[0][:-1], cuts[0][1:]):
            yield Box((a,), (b,))
    else:
        for a0, b0 in zip(cuts[0][:-1], cuts[0][1:]):
            for a1, b1 in zip(cuts[1][:-1], cuts[1][1:]):
                yield Box((a0, a1), (b0, b1))


def _complement_caps(cone: ConeSet, active: np.ndarray) -> list[tuple[np.ndarray, float]]:
    if cone.n == 1:
        covered = _fiber_1d(cone, active) if np.any(active) else set()
        return [(np.array([d]), 1.0) for d in (1.0, -1.0) if d not in covered]
    union = fiber_arcs(cone, active) if np.any(active) else []
    caps = []
    for s, length in _arcs_complement(union):
        caps.extend(_arc_to_caps(s, length))
    return caps


def complement(cone: ConeSet, omega: Box) -> ConeSet:
    """Open cone equal to ``(omega x sphere)`` minus a closed ``cone``.

    Space is cut into the open cells of the arrangement formed by the patch
    regions; on each cell the fiber of ``cone`` is constant and its
    complement on the circle is a finite union of open arcs, each of which
    is an open cap.  The result is exact away from the cell walls, a null
    set where the open cells do not report membership.
    """
    if not cone.closed:
        raise ValueError("complement expects a closed cone")
    patches = []
    for cell in _cells(cone, omega):
        active = cone.region_mask(cell.center)
        for center, radius in _complement_caps(cone, active):
            patches.append(ConePatch(cell, tuple(center), radius))
    return ConeSet(cone.n, tuple(patches), closed=False)


def cap_distance(eta, center, radius) -> np.ndarray:
    """Chord distance from unit ``eta`` to the cap ``{|zeta - center| <= radius}``."""
    eta = np.asarray(eta, float)
    center = np.asarray(center, float)
    if eta.shape[-1] == 1:
        inside = np.abs(eta[..., 0] - center[..., 0]) <= radius + BOUNDARY_TOL
        return np.where(inside, 0.0, 2.0)
    delta = np.abs(np.mod(_angle(eta) - _angle(center) + np.pi, TWO_PI) - np.pi)
    excess = np.maximum(delta - _half_width(radius), 0.0)
    return 2 * np.sin(excess / 2)


def distance(x, eta, cone: ConeSet) -> np.ndarray | float:
    """Max-metric distance from ``(x; eta)`` to ``cone``; ``inf`` for the empty cone."""
    x = np.asarray(x, float)
    eta = np.asarray(eta, float)
    shape = np.broadcast_shapes(x.shape[:-1], eta.shape[:-1])
    if not cone.patches:
        out = np.full(shape, np.inf)
    else:
        lo, hi, c, r = cone._arrays
        gap = np.maximum(np.maximum(lo - x[..., None, :], x[..., None, :] - hi), 0.0)
        dx = np.sqrt(np.sum(gap**2, axis=-1))
        deta = cap_distance(eta[..., None, :], c, r)
        out = np.min(np.maximum(dx, deta), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


# -- exhaustion ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Exhaustion:
    """One stage of the increasing family ``K_l``, ``Lambda_l``, ``L_l``.

    Attributes
    ----------
    ell : int
    K_ell : ndarray, shape (P, n)
        Sample points satisfying the three distance conditions.
    Lambda_ell : ConeSet
        Closed cone over ``K_ell`` built from the admissible sampled
        directions (small cells around each point, caps around runs of
        admissible directions).
    L_ell : tuple of Box
        Compact neighbourhood box of ``K_ell`` and the previous ``L``
        (empty tuple when nothing is admissible yet).
    samples : ndarray
        The spatial sample lattice.
    directions : ndarray
        The direction sample.
    """

    ell: int
    K_ell: np.ndarray
    Lambda_ell: ConeSet
    L_ell: tuple[Box, ...]
    samples: np.ndarray = field(repr=False)
    directions: np.ndarray = field(repr=False)


def _sample_lattice(omega: Box, spacing: float) -> tuple[np.ndarray, float]:
    axes = []
    steps = []
    for lo, hi in zip(omega.lo, omega.hi):
        count = int(np.floor((hi - lo) / spacing + 1e-9)) + 1
        step = (hi - lo) / (count - 1)
        axes.append(lo + step * np.arange(count))
        steps.append(step)
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, omega.n)
    return pts, min(steps)


def _full_fiber_boxes(gamma_prime: ConeSet, omega: Box) -> list[Box]:
    """Closed cells on which ``gamma_prime`` covers every direction."""
    if not gamma_prime.patches:
        return []
    out = []
    for cell in _cells(gamma_prime, omega):
        active = gamma_prime.region_mask(cell.center)
        if np.any(active) and not _complement_caps(gamma_prime, active):
            out.append(cell)
    return out


def _direction_runs(allowed: np.ndarray) -> list[tuple[int, int]]:
    """Maximal circular runs of True in ``allowed`` as (start, length)."""
    M = allowed.size
    if allowed.all():
        return [(0, M)]
    if not allowed.any():
        return []
    start = int(np.argmin(allowed))  # a False entry: runs never wrap past it
    runs = []
    i = 0
    while i < M:
        j = (start + i) % M
        if allowed[j]:
            length = 0
            while i < M and allowed[(start + i) % M]:
                length += 1
                i += 1
            runs.append((j, length))
        else:
            i += 1
    return runs


def _lambda_patches(x, allowed, directions, cell_half) -> list[ConePatch]:
    n = x.size
    cell = Box(tuple(x - cell_half), tuple(x + cell_half))
    if n == 1:
        return [ConePatch(cell, (float(d[0]),), 1.0) for d, ok in zip(directions, allowed) if ok]
    M = len(directions)
    step = TWO_PI / M
    patches = []
    for j, length in _direction_runs(allowed):
        if length == M:
            patches.append(ConePatch(cell, (1.0, 0.0), 2.0))
            patches.append(ConePatch(cell, (-1.0, 0.0), 2.0))
            continue
        start = _angle(directions[j]) - step / 4
        span = (length - 1) * step + step / 2
        for center, radius in _arc_to_caps(float(start), float(span)):
            patches.append(ConePatch(cell, tuple(center), radius))
    return patches


def exhaustion(
    gamma_prime: ConeSet,
    omega: Box,
    ell: int,
    *,
    sample_spacing: float | None = None,
    directions: np.ndarray | None = None,
) -> Exhaustion:
    """Stage ``ell`` of the exhaustion of the complement of ``gamma_prime``.

    ``K_ell`` collects lattice points ``x`` of ``omega`` with ``|x| <= ell``,
    ``dist(x, omega^c) >= 1/ell`` and ``dist(x, boundary of pi_1(Lambda))
    >= 1/ell``, where ``Lambda`` is the complement of ``gamma_prime`` and
    ``pi_1`` the projection to space.  The boundary distance is measured to
    the closed cells on which ``gamma_prime`` covers every direction
    (infinite when there are none).

    Parameters
    ----------
    gamma_prime : ConeSet
        Closed cone whose complement is exhausted.
    omega : Box
    ell : int
        Stage index, at least 1.
    sample_spacing : float, optional
        Spatial lattice step; defaults to 1/160 of the shortest side of
        ``omega`` in 1D and 1/64 in 2D.
    directions : ndarray, optional
        Direction sample; defaults to :func:`sample_directions`.
    """
    if ell < 1:
        raise ValueError("ell must be at least 1")
    n = omega.n
    if sample_spacing is None:
        sample_spacing = float(np.min(omega.lengths)) / (160 if n == 1 else 64)
    if directions is None:
        directions = sample_directions(n)
    pts, step = _sample_lattice(omega, sample_spacing)
    cell_half = step / 4

    full_boxes = _full_fiber_boxes(gamma_prime, omega)
    if full_boxes:
        d_bdry = np.min(np.stack([b.distance(pts) for b in full_boxes]), axis=0)
    else:
        d_bdry = np.full(len(pts), np.inf)
    d_ext = omega.distance_to_exterior(pts)
    radius = np.sqrt(np.sum(pts**2, axis=-1))

    # distance of every (point, direction) sample to gamma_prime
    if gamma_prime.patches:
        d_cone = distance(pts[:, None, :], directions[None, :, :], gamma_prime)
    else:
        d_cone = np.full((len(pts), len(directions)), np.inf)

    L_prev: Box | None = None
    for stage in range(1, ell + 1):
        inv = 1.0 / stage
        in_K = (radius <= stage + 1e-12) & (d_ext >= inv - 1e-12) & (d_bdry >= inv - 1e-12)
        K = pts[in_K]
        shrunk = _shrink(omega, inv)
        core = Box.cube(n, stage).intersect(shrunk) if shrunk is not None else None
        parts = [b for b in (L_prev, core) if b is not None]
        if len(K):
            parts.append(Box(tuple(K.min(0) - 1e-9), tuple(K.max(0) + 1e-9)))
        clip = _shrink(omega, 1.0 / (stage + 1))
        if parts and clip is not None:
            hull = parts[0]
            for b in parts[1:]:
                hull = hull.hull(b)
            L_box = hull.expand(1.0 / (2 * stage * (stage + 1))).intersect(clip)
            if L_box is not None:
                L_prev = L_box

    allowed = d_cone[in_K] >= 1.0 / ell - 1e-12
    patches: list[ConePatch] = []
    for x, ok in zip(K, allowed):
        patches.extend(_lambda_patches(x, ok, directions, cell_half))
    lam = ConeSet(n, tuple(patches), closed=True)
    L = (L_prev,) if L_prev is not None else ()
    return Exhaustion(ell, K, lam, L, pts, directions)


def _shrink(box: Box, margin: float) -> Box | None:
    lo = np.asarray(box.lo) + margin
    hi = np.asarray(box.hi) - margin
    if np.any(lo >= hi):
        return None
    return Box(tuple(lo), tuple(hi))


# -- support / cone disjointness ------------------------------------------------


def support_overlap_witness(chi: SampledField, V: ConeSet, gamma: ConeSet, directions: np.ndarray | None = None):
    """First sampled ``(x, eta)`` with ``x`` in supp chi, ``eta`` in V and ``(x; eta)`` in gamma.

    Returns ``None`` when there is none.  Points are grouped by the set of
    gamma regions containing them, so the cost is driven by the number of
    distinct groups rather than grid points.
    """
    if directions is None:
        directions = sample_directions(chi.n)
    if not gamma.patches or not V.patches:
        return None
    in_V = V.directions_member(directions)
    dirs = directions[in_V]
    if len(dirs) == 0:
        return None
    support = np.abs(chi.values) > 0
    pts = chi.grid.points[support]
    if len(pts) == 0:
        return None
    masks = gamma.region_mask(pts)
    groups, first = np.unique(masks, axis=0, return_index=True)
    caps = gamma.cap_mask(dirs)  # (D, P)
    for g, idx in zip(groups, first):
        if not g.any():
            continue
        hit = np.any(caps[:, g], axis=1)
        if hit.any():
            return pts[idx], dirs[int(np.argmax(hit))]
    return None


def disjoint_support_check(chi: SampledField, V: ConeSet, gamma: ConeSet, directions: np.ndarray | None = None) -> bool:
    """True iff no sampled ``(x in supp chi, eta in V)`` belongs to ``gamma``."""
    return support_overlap_witness(chi, V, gamma, directions) is None
