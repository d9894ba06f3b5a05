"""Uniform grids, sampled fields and discrete Fourier transforms.

All transforms use the convention

    f_hat(k) = integral of exp(+i k.x) f(x) dx,

which is the opposite sign to the usual FFT kernel.  On a grid with
points ``x_j = lo + j*dx`` the forward transform is evaluated exactly as
the Riemann sum ``sum_j f(x_j) exp(i k x_j) dx`` at the lattice
frequencies ``k_m = 2*pi*fftfreq(N, dx)``, which numpy provides through
``ifft`` (positive exponent) after a phase correction for ``lo``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Box",
    "Grid",
    "SampledField",
    "SpectralField",
    "DerivSupNorm",
    "Bump",
    "MAX_DERIV_ORDER",
    "make_bump_1d",
    "make_window",
    "dft_forward",
    "dft_forward_reflected",
    "dft_inverse",
    "translate",
    "spectral_derivative",
    "deriv_sup_norm",
    "save_field",
    "load_field",
    "field_to_csv",
]

#: Largest derivative order accepted by :func:`deriv_sup_norm`.
MAX_DERIV_ORDER = 16

FIELD_SCHEMA_VERSION = 1


def _as_tuple(v, name: str) -> tuple[float, ...]:
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a flat vector")
    return tuple(float(a) for a in arr)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lo, hi]`` in one or two dimensions."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = _as_tuple(self.lo, "lo")
        hi = _as_tuple(self.hi, "hi")
        if len(lo) != len(hi):
            raise ValueError("lo and hi must have the same length")
        if len(lo) not in (1, 2):
            raise ValueError(f"only dimensions 1 and 2 are supported, got {len(lo)}")
        if any(not (a < b) for a, b in zip(lo, hi)):
            raise ValueError(f"need lo < hi componentwise, got lo={lo}, hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, n: int, half: float, center=None) -> "Box":
        c = np.zeros(n) if center is None else np.asarray(center, float)
        return cls(tuple(c - half), tuple(c + half))

    @property
    def n(self) -> int:
        return len(self.lo)

    @property
    def lengths(self) -> np.ndarray:
        return np.asarray(self.hi) - np.asarray(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.lo) + np.asarray(self.hi))

    def contains(self, points, closed: bool = True, tol: float = 0.0) -> np.ndarray:
        """Membership of ``points`` (shape ``(..., n)``) in the box."""
        p = np.asarray(points, float)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        if closed:
            inside = (p >= lo - tol) & (p <= hi + tol)
        else:
            inside = (p > lo + tol) & (p < hi - tol)
        return np.all(inside, axis=-1)

    def contains_box(self, other: "Box", tol: float = 1e-12) -> bool:
        return bool(
            np.all(np.asarray(other.lo) >= np.asarray(self.lo) - tol)
            and np.all(np.asarray(other.hi) <= np.asarray(self.hi) + tol)
        )

    def distance(self, points) -> np.ndarray:
        """Euclidean distance from ``points`` to the closed box (0 inside)."""
        p = np.asarray(points, float)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        gap = np.maximum(np.maximum(lo - p, p - hi), 0.0)
        return np.sqrt(np.sum(gap**2, axis=-1))

    def distance_to_exterior(self, points) -> np.ndarray:
        """Distance from interior ``points`` to the complement (0 outside)."""
        p = np.asarray(points, float)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        d = np.min(np.minimum(p - lo, hi - p), axis=-1)
        return np.maximum(d, 0.0)

    def expand(self, margin: float) -> "Box":
        return Box(tuple(np.asarray(self.lo) - margin), tuple(np.asarray(self.hi) + margin))

    def intersect(self, other: "Box") -> "Box | None":
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if np.any(lo >= hi):
            return None
        return Box(tuple(lo), tuple(hi))

    def hull(self, other: "Box") -> "Box":
        return Box(tuple(np.minimum(self.lo, other.lo)), tuple(np.maximum(self.hi, other.hi)))

    def shift(self, a) -> "Box":
        a = np.asarray(a, float)
        return Box(tuple(np.asarray(self.lo) + a), tuple(np.asarray(self.hi) + a))

    def to_dict(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi)}

    @classmethod
    def from_dict(cls, d: dict) -> "Box":
        return cls(tuple(d["lo"]), tuple(d["hi"]))


@dataclass(frozen=True)
class Grid:
    """Uniform periodic sampling of a box with ``shape[i]`` points per axis.

    Points are ``lo + j*spacing`` for ``j = 0..N-1``, so ``hi`` itself is
    not sampled.  The dual frequency lattice has spacing ``2*pi/length``
    and Nyquist frequency ``pi/spacing`` per axis.
    """

    box: Box
    shape: tuple[int, ...]

    def __post_init__(self):
        shape = tuple(int(s) for s in np.atleast_1d(self.shape))
        if len(shape) != self.box.n:
            raise ValueError("shape must have one entry per box dimension")
        for s in shape:
            if s < 8 or s & (s - 1):
                raise ValueError(f"points per axis must be a power of two >= 8, got {s}")
        object.__setattr__(self, "shape", shape)

    @classmethod
    def default(cls, n: int) -> "Grid":
        """4096 points on [-8, 8] in 1D, 512 x 512 on [-8, 8]^2 in 2D."""
        if n == 1:
            return cls(Box((-8.0,), (8.0,)), (4096,))
        if n == 2:
            return cls(Box((-8.0, -8.0), (8.0, 8.0)), (512, 512))
        raise ValueError(f"only dimensions 1 and 2 are supported, got {n}")

    @property
    def n(self) -> int:
        return self.box.n

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(float(L / s) for L, s in zip(self.box.lengths, self.shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def freq_spacing(self) -> tuple[float, ...]:
        return tuple(float(2 * np.pi / L) for L in self.box.lengths)

    @property
    def dual_cell_volume(self) -> float:
        return float(np.prod(self.freq_spacing))

    @property
    def k_max(self) -> float:
        """Smallest per-axis Nyquist frequency."""
        return float(min(np.pi / d for d in self.spacing))

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(lo + d * np.arange(s) for lo, d, s in zip(self.box.lo, self.spacing, self.shape))

    @cached_property
    def freq_axes(self) -> tuple[np.ndarray, ...]:
        return tuple(2 * np.pi * np.fft.fftfreq(s, d) for s, d in zip(self.shape, self.spacing))

    @cached_property
    def points(self) -> np.ndarray:
        """Grid points, shape ``(*shape, n)``."""
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1)

    @cached_property
    def freqs(self) -> np.ndarray:
        """Lattice frequencies in FFT order, shape ``(*shape, n)``."""
        return np.stack(np.meshgrid(*self.freq_axes, indexing="ij"), axis=-1)

    @cached_property
    def freq_norm(self) -> np.ndarray:
        return np.sqrt(np.sum(self.freqs**2, axis=-1))

    @cached_property
    def _phase(self) -> np.ndarray:
        return np.exp(1j * np.tensordot(self.freqs, np.asarray(self.box.lo), axes=([-1], [0])))

    def nearest_index(self, points) -> tuple[np.ndarray, ...]:
        """Index of the grid point nearest to each of ``points``."""
        p = np.asarray(points, float)
        idx = []
        for i, (lo, d, s) in enumerate(zip(self.box.lo, self.spacing, self.shape)):
            idx.append(np.clip(np.rint((p[..., i] - lo) / d).astype(int), 0, s - 1))
        return tuple(idx)

    def nearest_freq_index(self, k) -> tuple[np.ndarray, ...]:
        """Index of the lattice frequency nearest to each of ``k`` (aliased)."""
        k = np.asarray(k, float)
        return tuple(
            np.rint(k[..., i] / dk).astype(int) % s
            for i, (dk, s) in enumerate(zip(self.freq_spacing, self.shape))
        )

    def snap(self, points) -> np.ndarray:
        """Round ``points`` to the nearest grid point coordinates."""
        idx = self.nearest_index(points)
        return np.stack([ax[i] for ax, i in zip(self.axes, idx)], axis=-1)

    def snap_shift(self, a) -> np.ndarray:
        """Round a displacement to an integer number of grid steps."""
        a = np.asarray(a, float)
        return np.rint(a / np.asarray(self.spacing)) * np.asarray(self.spacing)

    def to_dict(self) -> dict:
        return {"box": self.box.to_dict(), "shape": list(self.shape)}

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        return cls(Box.from_dict(d["box"]), tuple(d["shape"]))


@dataclass(frozen=True, eq=False)
class SampledField:
    """Complex samples of a field on ``grid``, zero outside ``support_box``.

    Parameters
    ----------
    grid : Grid
    values : array_like
        Samples with shape ``grid.shape``.
    support_box : Box, optional
        Closed sub-box outside which every sample is exactly zero.  Defaults
        to the whole grid box.  Values outside are rejected, so use
        :meth:`masked` to build a field from data that is only approximately
        supported.
    """

    grid: Grid
    values: np.ndarray
    support_box: Box | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values have shape {vals.shape}, grid expects {self.grid.shape}")
        sb = self.support_box
        if sb is None:
            sb = self.grid.box
        else:
            clipped = sb.intersect(self.grid.box)
            if clipped is None:
                raise ValueError("support_box does not meet the grid box")
            sb = clipped
            outside = ~sb.contains(self.grid.points, tol=1e-9)
            if np.any(vals[outside] != 0):
                raise ValueError("values do not vanish outside support_box")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "support_box", sb)

    @classmethod
    def masked(cls, grid: Grid, values, support_box: Box) -> "SampledField":
        """Zero ``values`` outside ``support_box`` and wrap them."""
        vals = np.array(values, dtype=complex)
        vals[~support_box.contains(grid.points, tol=1e-9)] = 0
        return cls(grid, vals, support_box)

    @classmethod
    def zeros(cls, grid: Grid) -> "SampledField":
        return cls(grid, np.zeros(grid.shape, complex))

    @classmethod
    def from_function(cls, grid: Grid, func: Callable, support_box: Box | None = None) -> "SampledField":
        """Sample ``func(points)`` where ``points`` has shape ``(*shape, n)``."""
        vals = func(grid.points)
        if support_box is None:
            return cls(grid, vals)
        return cls.masked(grid, vals, support_box)

    @property
    def n(self) -> int:
        return self.grid.n

    def _check_grid(self, other: "SampledField"):
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, SampledField):
            self._check_grid(other)
            return SampledField(self.grid, self.values + other.values, self.support_box.hull(other.support_box))
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, SampledField):
            self._check_grid(other)
            return SampledField(self.grid, self.values - other.values, self.support_box.hull(other.support_box))
        return NotImplemented

    def __neg__(self):
        return SampledField(self.grid, -self.values, self.support_box)

    def __mul__(self, other):
        if isinstance(other, SampledField):
            self._check_grid(other)
            sb = self.support_box.intersect(other.support_box)
            if sb is None:
                return SampledField.zeros(self.grid)
            return SampledField.masked(self.grid, self.values * other.values, sb)
        if np.isscalar(other):
            return SampledField(self.grid, self.values * other, self.support_box)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, c):
        if np.isscalar(c):
            return SampledField(self.grid, self.values / c, self.support_box)
        return NotImplemented

    def conj(self) -> "SampledField":
        return SampledField(self.grid, np.conj(self.values), self.support_box)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def integral(self) -> complex:
        return complex(np.sum(self.values) * self.grid.cell_volume)

    def value_at(self, point) -> complex:
        """Sample at the grid point nearest to ``point``."""
        return complex(self.values[self.grid.nearest_index(np.asarray(point, float))])


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier data either on the lattice dual to ``grid`` or as a callable.

    The callable form maps frequency points of shape ``(..., n)`` to complex
    values.  Lattice values are stored in FFT order.
    """

    grid: Grid | None = None
    values: np.ndarray | None = None
    func: Callable | None = None

    def __post_init__(self):
        if self.values is None and self.func is None:
            raise ValueError("need lattice values or a callable")
        if self.values is not None:
            if self.grid is None:
                raise ValueError("lattice values need the grid they are dual to")
            vals = np.asarray(self.values, complex)
            if vals.shape != self.grid.shape:
                raise ValueError("lattice values do not match the grid shape")
            object.__setattr__(self, "values", vals)

    def lattice(self, grid: Grid | None = None) -> np.ndarray:
        """Values on the lattice dual to ``grid`` (default: own grid)."""
        grid = grid or self.grid
        if grid is None:
            raise ValueError("no lattice available for a callable without a grid")
        if self.values is not None and grid == self.grid:
            return self.values
        if self.func is None:
            raise ValueError("lattice mismatch: spectral values live on a different grid")
        return np.asarray(self.func(grid.freqs), complex)

    def evaluate(self, k) -> np.ndarray:
        """Values at frequency points ``k`` (nearest lattice point if sampled)."""
        k = np.asarray(k, float)
        if self.func is not None:
            return np.asarray(self.func(k), complex)
        return self.values[self.grid.nearest_freq_index(k)]


@dataclass(frozen=True)
class DerivSupNorm:
    """Value of ``max_{|alpha|<=m} sup_{x in K} |d^alpha f(x)|``."""

    m: int
    K: Box
    value: float


@dataclass(frozen=True)
class Bump:
    """Smooth nonincreasing cutoff, 1 on ``(-inf, one_until]`` and 0 on ``[zero_at, inf)``.

    The transition is the standard ratio ``s(t)/(s(t)+s(1-t))`` with
    ``s(t) = exp(-1/t)``, which is C-infinity and flat at both ends.
    """

    one_until: float
    zero_at: float

    def __post_init__(self):
        if not (self.one_until < self.zero_at):
            raise ValueError(f"need one_until < zero_at, got {self.one_until}, {self.zero_at}")

    def __call__(self, t):
        t = np.asarray(t, float)
        u = (t - self.one_until) / (self.zero_at - self.one_until)
        return 1.0 - _smooth_step(u)


def _flat(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _smooth_step(u: np.ndarray) -> np.ndarray:
    """0 for u <= 0, 1 for u >= 1, smooth in between."""
    u = np.asarray(u, float)
    a = _flat(u)
    b = _flat(1.0 - u)
    return a / (a + b)


def make_bump_1d(half: float, one_until: float) -> Bump:
    """Cutoff equal to 1 on ``(-inf, one_until]`` and 0 on ``[2*half, inf)``.

    Parameters
    ----------
    half : float
        Half of the point where the cutoff reaches zero.
    one_until : float
        End of the plateau, ``0 < one_until < 2*half``.

    Examples
    --------
    >>> chi = make_bump_1d(0.5, 0.5)
    >>> float(chi(0.0)), float(chi(1.0))
    (1.0, 0.0)
    """
    if not (0 < one_until < 2 * half):
        raise ValueError(f"need 0 < one_until < 2*half, got one_until={one_until}, half={half}")
    return Bump(float(one_until), float(2 * half))


def make_window(center, radius: float, grid: Grid, profile: str = "bump") -> SampledField:
    """Radial test function centred at ``center`` with support ``ball(center, 2*radius)``.

    Parameters
    ----------
    center : array_like
        Centre point.
    radius : float
        Plateau radius.  The window vanishes outside ``ball(center, 2*radius)``.
    grid : Grid
    profile : {"bump", "gauss"}
        ``"bump"`` is identically 1 on ``ball(center, radius)``.  ``"gauss"``
        multiplies the bump by ``exp(-r**2 / (2*sigma**2))`` with
        ``sigma = radius/4``; its Fourier transform is much more concentrated
        at moderate frequencies, which sharpens decay measurements.

    Returns
    -------
    SampledField
    """
    c = np.asarray(center, float).reshape(-1)
    if c.size != grid.n:
        raise ValueError("center has the wrong dimension")
    if radius <= 0:
        raise ValueError("radius must be positive")
    sb = Box(tuple(c - 2 * radius), tuple(c + 2 * radius))
    if not grid.box.contains_box(sb, tol=1e-9):
        raise ValueError(f"window ball({tuple(c)}, {2 * radius}) escapes the grid box")
    r = np.sqrt(np.sum((grid.points - c) ** 2, axis=-1))
    vals = Bump(radius, 2 * radius)(r)
    if profile == "gauss":
        sigma = radius / 4.0
        vals = vals * np.exp(-(r**2) / (2 * sigma**2))
    elif profile != "bump":
        raise ValueError(f"unknown window profile {profile!r}")
    return SampledField.masked(grid, vals, sb)


def _fft_forward_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    scale = grid.cell_volume * np.prod(grid.shape)
    return scale * grid._phase * np.fft.ifftn(values)


def dft_forward(f: SampledField) -> SpectralField:
    """Lattice Fourier transform ``sum_x f(x) exp(i k.x) dx``."""
    return SpectralField(f.grid, _fft_forward_values(f.grid, f.values))


def dft_forward_reflected(f: SampledField) -> np.ndarray:
    """Lattice values of ``f_hat(-k)`` in FFT order.

    Computed as ``conj(dft(conj f))(k)``, which is exact for every lattice
    frequency including the Nyquist one, where index negation would alias.
    """
    return np.conj(_fft_forward_values(f.grid, np.conj(f.values)))


def dft_inverse(F: SpectralField, grid: Grid | None = None, support_box: Box | None = None) -> SampledField:
    """Inverse of :func:`dft_forward` on the lattice dual to ``grid``.

    Parameters
    ----------
    F : SpectralField
        Lattice values on ``grid`` (or a callable, which is sampled).
    grid : Grid, optional
        Defaults to ``F.grid``.  A lattice on a different grid is an error.
    support_box : Box, optional
        If given, the result is masked to this box.
    """
    grid = grid or F.grid
    if grid is None:
        raise ValueError("a grid is required")
    if F.values is not None and F.grid != grid and F.func is None:
        raise ValueError("lattice mismatch between spectral field and grid")
    vals = F.lattice(grid)
    scale = grid.cell_volume * np.prod(grid.shape)
    out = np.fft.fftn(vals / grid._phase) / scale
    if support_box is None:
        return SampledField(grid, out)
    return SampledField.masked(grid, out, support_box)


def translate(f: SampledField, a) -> SampledField:
    """Exact lattice shift ``(T_a f)(y) = f(y - a)``.

    ``a`` must be an integer multiple of the grid spacing (to 1e-9 relative
    to the spacing) and the shifted support must stay inside the box.
    """
    grid = f.grid
    a = np.asarray(a, float).reshape(-1)
    if a.size != grid.n:
        raise ValueError("shift has the wrong dimension")
    steps = a / np.asarray(grid.spacing)
    isteps = np.rint(steps)
    if np.any(np.abs(steps - isteps) > 1e-9):
        raise ValueError(f"shift {tuple(a)} is not a multiple of the grid spacing")
    new_support = f.support_box.shift(isteps * np.asarray(grid.spacing))
    if not grid.box.contains_box(new_support, tol=1e-9):
        raise ValueError("translated support would leave the grid box")
    vals = np.roll(f.values, tuple(int(s) for s in isteps), axis=tuple(range(grid.n)))
    return SampledField(grid, vals, new_support)


def _derivative_multiplier(grid: Grid, alpha: Sequence[int]) -> np.ndarray:
    mult = np.ones(grid.shape, complex)
    for axis, (order, k, s) in enumerate(zip(alpha, grid.freq_axes, grid.shape)):
        if order == 0:
            continue
        factor = (-1j * k) ** order
        if order % 2 == 1:
            factor = factor.copy()
            factor[s // 2] = 0.0  # Nyquist mode has no consistent odd derivative
        shape = [1] * grid.n
        shape[axis] = s
        mult = mult * factor.reshape(shape)
    return mult


def spectral_derivative(f: SampledField, alpha: Sequence[int]) -> np.ndarray:
    """Values of ``d^alpha f`` on the grid, computed spectrally."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != f.n or any(a < 0 for a in alpha):
        raise ValueError("alpha must be a nonnegative multi-index of length n")
    if sum(alpha) == 0:
        return np.array(f.values)
    return np.fft.fftn(_derivative_multiplier(f.grid, alpha) * np.fft.ifftn(f.values))


def _multi_indices(n: int, m: int):
    for alpha in itertools.product(range(m + 1), repeat=n):
        if sum(alpha) <= m:
            yield alpha


def deriv_sup_norm(f: SampledField, m: int, K: Box) -> DerivSupNorm:
    """``pi_{m,K}(f) = max_{|alpha|<=m} sup_{x in K} |d^alpha f(x)|``.

    Derivatives are spectral; the sup runs over grid points in the closed
    box ``K``.
    """
    if m < 0 or m > MAX_DERIV_ORDER:
        raise ValueError(f"derivative order must lie in [0, {MAX_DERIV_ORDER}], got {m}")
    mask = K.contains(f.grid.points, tol=1e-12)
    if not np.any(mask):
        return DerivSupNorm(m, K, 0.0)
    spec = np.fft.ifftn(f.values)
    best = 0.0
    for alpha in _multi_indices(f.n, m):
        if sum(alpha) == 0:
            vals = f.values
        else:
            vals = np.fft.fftn(_derivative_multiplier(f.grid, alpha) * spec)
        best = max(best, float(np.max(np.abs(vals[mask]))))
    return DerivSupNorm(m, K, best)


def save_field(path, f: SampledField) -> Path:
    """Write ``f`` as a JSON header plus a little-endian complex64 sidecar.

    Returns the header path.  The payload file sits next to it with suffix
    ``.bin``.
    """
    path = Path(path)
    payload = path.with_suffix(".bin")
    header = {
        "format": "sampled-field",
        "schema_version": FIELD_SCHEMA_VERSION,
        "grid": f.grid.to_dict(),
        "spacing": list(f.grid.spacing),
        "support_box": f.support_box.to_dict(),
        "dtype": "<c8",
        "order": "C",
        "payload": payload.name,
    }
    path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
    payload.write_bytes(f.values.astype("<c8").tobytes(order="C"))
    return path


def load_field(path) -> SampledField:
    """Read a field written by :func:`save_field`."""
    path = Path(path)
    header = json.loads(path.read_text())
    if header.get("format") != "sampled-field":
        raise ValueError(f"{path} is not a sampled-field header")
    grid = Grid.from_dict(header["grid"])
    raw = np.frombuffer((path.parent / header["payload"]).read_bytes(), dtype=header["dtype"])
    if raw.size != np.prod(grid.shape):
        raise ValueError("payload size does not match the grid")
    vals = raw.reshape(grid.shape).astype(complex)
    return SampledField.masked(grid, vals, Box.from_dict(header["support_box"]))


def field_to_csv(f: SampledField) -> str:
    """CSV text with columns ``x,re,im`` for a 1D field."""
    if f.n != 1:
        raise ValueError("CSV export is only defined for 1D fields")
    lines = ["x,re,im"]
    for x, v in zip(f.grid.axes[0], f.values):
        lines.append(f"{x:.17g},{v.real:.17g},{v.imag:.17g}")
    return "\n".join(lines) + "\n"
