"""Seeded generators of smooth test fields.

This is the only place pseudo-randomness enters the package; every
numerical routine elsewhere is deterministic.
"""

from __future__ import annotations

import numpy as np

from .grid import Box, Grid, SampledField, make_window

__all__ = ["random_smooth_field", "random_pair_bank"]


def random_smooth_field(
    grid: Grid,
    rng: np.random.Generator,
    *,
    bumps: int = 3,
    region: Box | None = None,
    radius: tuple[float, float] = (0.4, 1.0),
    max_wave: float = 4.0,
) -> SampledField:
    """Sum of a few windowed plane waves with random centres and amplitudes.

    Parameters
    ----------
    grid : Grid
    rng : numpy.random.Generator
    bumps : int
        Number of windows.
    region : Box, optional
        Box the windows' supports must stay in; default is the middle half
        of the grid box.
    radius : (float, float)
        Range of plateau radii.
    max_wave : float
        Largest wave number of the modulation.
    """
    region = region or Box(tuple(grid.box.center - grid.box.lengths / 4), tuple(grid.box.center + grid.box.lengths / 4))
    total = np.zeros(grid.shape, complex)
    hull = None
    for _ in range(bumps):
        r = rng.uniform(*radius)
        lo = np.asarray(region.lo) + 2 * r
        hi = np.asarray(region.hi) - 2 * r
        if np.any(hi < lo):
            raise ValueError("region too small for the requested radius")
        c = rng.uniform(lo, hi)
        w = make_window(c, r, grid)
        k = rng.normal(size=grid.n)
        k *= rng.uniform(0, max_wave) / max(np.linalg.norm(k), 1e-12)
        amp = complex(rng.normal(), rng.normal())
        total += amp * w.values * np.exp(1j * (grid.points @ k))
        hull = w.support_box if hull is None else hull.hull(w.support_box)
    return SampledField.masked(grid, total, hull)


def random_pair_bank(grid: Grid, seed: int, count: int, **kw) -> list[tuple[SampledField, SampledField]]:
    """``count`` independent pairs of smooth fields from one seed."""
    rng = np.random.default_rng(seed)
    return [(random_smooth_field(grid, rng, **kw), random_smooth_field(grid, rng, **kw)) for _ in range(count)]
