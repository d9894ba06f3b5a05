"""Pairing a field that is singular in one direction with a smooth test field.

``u`` is singular at the origin along -x, and ``gamma`` records that.  ``v``
is allowed singular directions around +y, which stay clear of the flipped
cone ``-gamma``.  That separation keeps the pairing well defined, and a
conic partition of unity
splits it into four pieces per window.  The first piece vanishes
identically, the rest are controlled by seminorms of ``u`` and ``v``.
"""

import numpy as np

from microlocal import Box, ConePatch, ConeSet, Grid, make_window
from microlocal.counterexample import HormanderParams, hormander_field
from microlocal.grid import SampledField
from microlocal.pairing import build_conic_partition, eval_eq3_bound, pair_direct, pair_space_oracle, pair_split

grid = Grid.default(2)
u = hormander_field(HormanderParams((-1.0, 0.0), 2.0), grid)
v = make_window((0.3, 0.2), 0.6, grid) * SampledField.from_function(grid, lambda x: np.cos(2 * x[..., 0] + x[..., 1]))

gamma = ConeSet(2, (ConePatch(grid.box, (-1.0, 0.0), 0.3),))
wf_v = ConeSet(2, (ConePatch(grid.box, (0.0, 1.0), 0.3),))
K = v.support_box.expand(0.25)

print(f"<u, v> through the transform: {pair_direct(u, v):.10f}")
print(f"<u, v> by spatial quadrature: {pair_space_oracle(u, v):.10f}")

part = build_conic_partition(gamma, wf_v, K, grid=grid)
rep = pair_split(u, v, part)
print(f"\nconic partition with {len(rep.pieces)} windows")
print(f"largest |I1| over windows: {max(abs(p[0]) for p in rep.pieces):.1e}")
print(f"sum of pieces minus direct pairing, relative: {rep.relative_discrepancy:.1e}")

b = eval_eq3_bound(u, v, part, N=2, M=4)
try:
    build_conic_partition(gamma, ConeSet(2, (ConePatch(grid.box, (1.0, 0.0), 0.3),)), K, grid=grid)
except ValueError as e:
    print(f"declaring +x for v instead is refused: {e}")

print(f"\nbound: |<u, v>| = {b.lhs:.4g} <= {b.rhs_total:.4g} : {b.holds}")
