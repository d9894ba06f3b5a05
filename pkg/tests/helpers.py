"""Shared builders for the test suite."""

from functools import lru_cache

import numpy as np

from microlocal.bank import random_smooth_field
from microlocal.cones import ConePatch, ConeSet
from microlocal.counterexample import HormanderParams, hormander_field
from microlocal.grid import Box, Grid
from microlocal.pairing import build_conic_partition


@lru_cache(maxsize=None)
def pairing_triples(seed: int, count: int):
    """``(u, v, partition)`` triples in 1D with ``u`` singular at ``(0; +1)``.

    ``gamma`` carries the direction ``+1`` everywhere, and ``v`` is smooth
    with its (empty) wavefront declared inside ``{+1}``, so the separation
    condition holds on every window.
    """
    grid = Grid.default(1)
    gamma = ConeSet(1, (ConePatch(grid.box, (1.0,), 0.0),))
    wf_v = ConeSet(1, (ConePatch(grid.box, (1.0,), 0.0),))
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        s = float(rng.choice([2.0, 3.0]))
        u = hormander_field(HormanderParams((1.0,), s), grid) + random_smooth_field(grid, rng)
        region = Box((-2.0,), (2.0,))
        v = random_smooth_field(grid, rng, region=region, bumps=2)
        K = v.support_box.expand(0.25)
        part = build_conic_partition(gamma, wf_v, K, grid=grid)
        out.append((u, v, part))
    return tuple(out)
