"""Hormander seminorms, directional decay profiles and wavefront estimates.

The seminorm attached to ``(N, V, chi)`` is

    ||u||_{N,V,chi} = sup_{k in V} (1 + |k|)^N |(u chi)^(k)|,

evaluated here over the finite frequency lattice intersected with the cone
``V`` and the ball of radius ``k_max``.

Regularity along a ray is judged from a decay exponent: the least-squares
slope of ``-log|(u w)^(lambda eta)|`` against ``log(1 + lambda)`` on a
geometric ladder of ``lambda`` values, where ``w`` is a window at the
point of interest.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .cones import ConeSet, support_overlap_witness
from .grid import Box, SampledField, SpectralField, deriv_sup_norm, dft_forward, dft_inverse, make_window

__all__ = [
    "BETA",
    "SeminormSpec",
    "SeminormValue",
    "DecayProfile",
    "WfSample",
    "WfEstimate",
    "Eq5Report",
    "ProductRuleReport",
    "eval_seminorm",
    "decay_profile",
    "fit_decay_exponent",
    "wf_estimate",
    "check_eq5_bound",
    "check_product_rule",
    "classify",
]

#: Constant with ``1 + t <= BETA * (1 + t**2)`` for all ``t >= 0``.
BETA = (1 + np.sqrt(2)) / 2

DEFAULT_FIT_LO = 16.0
DEFAULT_FLOOR = 1e-15


@dataclass(frozen=True, eq=False)
class SeminormSpec:
    """One seminorm ``(N, V, chi)``; only the caps of ``V`` matter."""

    N: int
    V: ConeSet
    chi: SampledField

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 0:
            raise ValueError(f"N must be a nonnegative integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))

    def violation(self, gamma: ConeSet, directions=None):
        """Sampled ``(x, eta)`` in supp chi x V that lies in ``gamma``, or None."""
        return support_overlap_witness(self.chi, self.V, gamma, directions)

    def admissible(self, gamma: ConeSet, directions=None) -> bool:
        return self.violation(gamma, directions) is None


@dataclass(frozen=True)
class SeminormValue:
    """Lattice seminorm together with where it was attained.

    ``saturated`` flags a maximiser in the outer 5% of the frequency band,
    meaning the finite lattice may be cutting off growth.
    """

    value: float
    k_star: tuple[float, ...] | None
    empty: bool = False
    saturated: bool = False

    def __float__(self):
        return self.value


def _as_sampled(u, grid) -> SampledField:
    if isinstance(u, SampledField):
        if u.grid != grid:
            raise ValueError("field and window live on different grids")
        return u
    if isinstance(u, SpectralField):
        return dft_inverse(u, grid)
    raise TypeError("u must be a SampledField or SpectralField")


def _direction_mask(grid, V: ConeSet, k_max: float) -> np.ndarray:
    k = grid.freqs
    r = grid.freq_norm
    mask = (r > 0) & (r <= k_max * (1 + 1e-12))
    if not V.patches:
        return np.zeros(grid.shape, bool)
    unit = np.zeros_like(k)
    unit[mask] = k[mask] / r[mask, None]
    return mask & V.directions_member(unit)


def eval_seminorm(u, spec: SeminormSpec, k_max: float | None = None, gamma: ConeSet | None = None) -> SeminormValue:
    """Lattice value of ``sup_{k in V, |k| <= k_max} (1+|k|)^N |(u chi)^(k)|``.

    Parameters
    ----------
    u : SampledField or SpectralField
    spec : SeminormSpec
    k_max : float, optional
        Frequency cutoff, default the Nyquist frequency of ``spec.chi.grid``.
    gamma : ConeSet, optional
        When given, the spec is checked against it and a ``ValueError`` is
        raised if ``supp chi x V`` meets ``gamma``.

    Returns
    -------
    SeminormValue
        ``empty`` is set (with a warning) when no lattice point lies in ``V``.
    """
    grid = spec.chi.grid
    if gamma is not None:
        bad = spec.violation(gamma)
        if bad is not None:
            raise ValueError(f"seminorm not defined: (x={bad[0]}, eta={bad[1]}) of supp chi x V lies in gamma")
    if k_max is None:
        k_max = grid.k_max
    mask = _direction_mask(grid, spec.V, k_max)
    if not np.any(mask):
        warnings.warn("cone V contains no lattice frequency", RuntimeWarning, stacklevel=2)
        return SeminormValue(0.0, None, empty=True)
    F = dft_forward(_as_sampled(u, grid) * spec.chi).values
    weighted = (1 + grid.freq_norm[mask]) ** spec.N * np.abs(F[mask])
    i = int(np.argmax(weighted))
    k_star = grid.freqs[mask][i]
    value = float(weighted[i])
    saturated = bool(value > 0 and np.linalg.norm(k_star) >= 0.95 * k_max)
    return SeminormValue(value, tuple(float(a) for a in k_star), False, saturated)


@dataclass(frozen=True, eq=False)
class DecayProfile:
    """Weighted magnitudes ``(1+lambda)^N |(u w)^(lambda eta)|`` along a ray.

    Attributes
    ----------
    direction : ndarray
    lambdas : ndarray
        ``|k|`` of the lattice points used, strictly increasing.
    magnitudes : ndarray
    fitted_exponent : float
        Least-squares slope of ``-log(magnitude)`` against ``log(1+lambda)``
        on usable points of the fit window; NaN when inconclusive.
    fit_residual : float
        RMS residual of that fit.
    status : str
        ``"ok"``, ``"floor"`` (the exponent is the lower bound obtained
        where the profile sinks below the roundoff floor) or
        ``"inconclusive"`` (fewer than 6 usable points and no floor crossing).
    used : ndarray of bool
        Points that entered the fit.
    """

    direction: np.ndarray
    lambdas: np.ndarray
    magnitudes: np.ndarray
    fitted_exponent: float
    fit_residual: float
    status: str
    used: np.ndarray = field(repr=False)
    point: tuple[float, ...] = ()
    N: int = 0

    def to_csv(self) -> str:
        lines = ["lambda,magnitude,used"]
        for lam, mag, u in zip(self.lambdas, self.magnitudes, self.used):
            lines.append(f"{lam:.17g},{mag:.17g},{int(u)}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "point": list(self.point),
            "direction": [float(a) for a in self.direction],
            "N": self.N,
            "lambdas": [float(a) for a in self.lambdas],
            "magnitudes": [float(a) for a in self.magnitudes],
            "fitted_exponent": _json_float(self.fitted_exponent),
            "fit_residual": _json_float(self.fit_residual),
            "status": self.status,
        }


def _json_float(v: float):
    return None if not np.isfinite(v) else float(v)


def fit_decay_exponent(lambdas, magnitudes) -> tuple[float, float]:
    """Slope and RMS residual of ``-log(magnitudes)`` against ``log(1+lambdas)``."""
    lam = np.asarray(lambdas, float)
    mag = np.asarray(magnitudes, float)
    if lam.size < 2:
        return float("nan"), float("nan")
    X = np.log1p(lam)
    Y = -np.log(mag)
    A = np.stack([X, np.ones_like(X)], axis=1)
    coef, *_ = np.linalg.lstsq(A, Y, rcond=None)
    resid = Y - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))


def decay_profile(
    u,
    x,
    eta,
    window_radius: float,
    N: int = 0,
    *,
    window: str = "bump",
    n_lambdas: int = 32,
    lambda_min: float = 4.0,
    lambda_max: float | None = None,
    fit_range: tuple[float, float | None] = (DEFAULT_FIT_LO, None),
    floor: float = DEFAULT_FLOOR,
    grid=None,
) -> DecayProfile:
    """Directional decay of ``u`` windowed at ``x``.

    Parameters
    ----------
    u : SampledField or SpectralField
    x : array_like
        Window centre.  The window ``ball(x, 2*window_radius)`` must fit in
        the box.
    eta : array_like
        Direction of the ray.
    window_radius : float
        Plateau radius of the window (see :func:`make_window`).
    N : int
        Weight exponent; the fitted exponent of the weighted profile is
        the raw one minus ``N``.
    window : {"bump", "gauss"}
        Window profile passed to :func:`make_window`.
    n_lambdas, lambda_min, lambda_max : optional
        Geometric ladder; ``lambda_max`` defaults to ``0.8*k_max``.
    fit_range : (float, float or None)
        Fit window in ``lambda``; the upper end defaults to ``0.8*k_max``.
    floor : float
        Magnitudes below ``floor`` times the largest lattice modulus are
        treated as roundoff and left out of the fit.
    grid : Grid, optional
        Needed only when ``u`` is a callable spectral field.
    """
    if grid is None:
        grid = u.grid
    uf = _as_sampled(u, grid)
    xc = np.asarray(x, float).reshape(-1)
    direction = np.asarray(eta, float).reshape(-1)
    direction = direction / np.linalg.norm(direction)
    w = make_window(xc, window_radius, grid, profile=window)
    F = dft_forward(uf * w).values
    peak = float(np.max(np.abs(F)))

    k_top = 0.8 * grid.k_max
    lam_hi = k_top if lambda_max is None else lambda_max
    ladder = np.geomspace(lambda_min, lam_hi, n_lambdas)
    idx = grid.nearest_freq_index(ladder[:, None] * direction[None, :])
    k = grid.freqs[idx]
    lam = np.sqrt(np.sum(k**2, axis=-1))
    raw = np.abs(F[idx])
    lam, order = np.unique(lam, return_index=True)
    raw = raw[order]
    mags = (1 + lam) ** N * raw

    lo, hi = fit_range
    hi = k_top if hi is None else hi
    in_window = (lam >= lo * (1 - 1e-12)) & (lam <= hi * (1 + 1e-12))
    above = raw > floor * peak
    used = in_window & above
    slope, resid, status = float("nan"), float("nan"), "inconclusive"
    if used.sum() >= 6:
        slope, resid = fit_decay_exponent(lam[used], mags[used])
        status = "ok"
    # Sinking into roundoff inside the window: the secant from the first
    # usable point down to the floor bounds the decay rate from below.
    sunk = np.flatnonzero(in_window & ~above)
    if used.any() and sunk.size and sunk[0] > np.flatnonzero(used)[0]:
        i0, i1 = np.flatnonzero(used)[0], sunk[0]
        secant = np.log(raw[i0] / (floor * peak)) / np.log((1 + lam[i1]) / (1 + lam[i0])) - N
        if not np.isfinite(slope) or secant > slope:
            slope, status = float(secant), "floor"
    return DecayProfile(direction, lam, mags, slope, resid, status, used, tuple(float(a) for a in xc), N)


@dataclass(frozen=True)
class WfSample:
    x: tuple[float, ...]
    eta: tuple[float, ...]
    fitted_exponent: float
    verdict: str


@dataclass(frozen=True)
class WfEstimate:
    """Per-sample verdicts ``regular``, ``singular`` or ``inconclusive``."""

    samples: tuple[WfSample, ...]
    s_singular: float = 6.0
    s_regular: float = 8.0

    def verdicts(self) -> list[str]:
        return [s.verdict for s in self.samples]

    def singular_points(self) -> list[WfSample]:
        return [s for s in self.samples if s.verdict == "singular"]

    def to_csv(self) -> str:
        n = len(self.samples[0].x) if self.samples else 1
        head = [f"x{i}" for i in range(n)] + [f"eta{i}" for i in range(n)] + ["exponent", "verdict"]
        lines = [",".join(head)]
        for s in self.samples:
            vals = [f"{v:.17g}" for v in s.x + s.eta]
            exp = "nan" if not np.isfinite(s.fitted_exponent) else f"{s.fitted_exponent:.17g}"
            lines.append(",".join(vals + [exp, s.verdict]))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "thresholds": {"s_singular": self.s_singular, "s_regular": self.s_regular},
            "samples": [
                {
                    "x": list(s.x),
                    "eta": list(s.eta),
                    "fitted_exponent": _json_float(s.fitted_exponent),
                    "verdict": s.verdict,
                }
                for s in self.samples
            ],
        }


def classify(exponent: float, s_singular: float = 6.0, s_regular: float = 8.0) -> str:
    """Threshold rule turning a decay exponent into a verdict."""
    if not np.isfinite(exponent):
        return "inconclusive"
    if exponent >= s_regular:
        return "regular"
    if exponent <= s_singular:
        return "singular"
    return "inconclusive"


def wf_estimate(
    u,
    spatial_samples,
    direction_samples,
    window_radius: float,
    thresholds: tuple[float, float] = (6.0, 8.0),
    **profile_kw,
) -> WfEstimate:
    """Classify every ``(x, eta)`` pair of the two sample lists.

    Extra keyword arguments go to :func:`decay_profile`.
    """
    s_sing, s_reg = thresholds
    if s_sing >= s_reg:
        raise ValueError("need s_singular < s_regular")
    out = []
    for x in np.atleast_2d(np.asarray(spatial_samples, float)):
        for eta in np.atleast_2d(np.asarray(direction_samples, float)):
            prof = decay_profile(u, x, eta, window_radius, **profile_kw)
            e = prof.fitted_exponent
            out.append(WfSample(tuple(map(float, x)), tuple(map(float, prof.direction)), e, classify(e, s_sing, s_reg)))
    return WfEstimate(tuple(out), s_sing, s_reg)


@dataclass(frozen=True)
class Eq5Report:
    """Lattice check of ``(1+|k|)^N |(f chi)^(k)| <= (4(n+1)beta)^N |K| pi_2N(chi) pi_2N(f)``."""

    N: int
    lhs_max: float
    rhs: float
    holds: bool


def check_eq5_bound(f: SampledField, chi: SampledField, N: int, K: Box) -> Eq5Report:
    """Compare the weighted lattice sup of ``(f chi)^`` with its derivative bound."""
    n = f.n
    F = dft_forward(f * chi).values
    lhs = float(np.max((1 + f.grid.freq_norm) ** N * np.abs(F)))
    pf = deriv_sup_norm(f, 2 * N, K).value
    pc = deriv_sup_norm(chi, 2 * N, K).value
    rhs = float((4 * (n + 1) * BETA) ** N * K.volume * pc * pf)
    return Eq5Report(N, lhs, rhs, bool(lhs <= rhs * (1 + 1e-12)))


@dataclass(frozen=True)
class ProductRuleReport:
    """Check of ``pi_m(f chi) <= 2^m pi_m(f) pi_m(chi)`` on ``K``."""

    m: int
    lhs: float
    rhs: float
    holds: bool


def check_product_rule(f: SampledField, chi: SampledField, m: int, K: Box) -> ProductRuleReport:
    lhs = deriv_sup_norm(f * chi, m, K).value
    rhs = 2.0**m * deriv_sup_norm(f, m, K).value * deriv_sup_norm(chi, m, K).value
    return ProductRuleReport(m, lhs, rhs, bool(lhs <= rhs * (1 + 1e-12)))
