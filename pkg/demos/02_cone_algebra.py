"""Closed conic sets over a box: membership, flip, complement, exhaustion.

The cone below carries directions within 0.6 (chord) of +x over the right
half of the box.  Its flip carries the opposite directions, and the open
complement of the flip is approximated from inside by closed cones that
grow with the stage index.
"""

import numpy as np

from microlocal import Box, ConePatch, ConeSet, complement, exhaustion, flip, member
from microlocal.cones import distance

omega = Box.cube(2, 4.0)
gamma = ConeSet(2, (ConePatch(Box((0.0, -4.0), (4.0, 4.0)), (1.0, 0.0), 0.6),))

for x, eta in (((1.0, 0.0), (1.0, 0.0)), ((1.0, 0.0), (-1.0, 0.0)), ((-1.0, 0.0), (1.0, 0.0))):
    print(f"(x={x}, eta={eta}): in cone {member(gamma, x, eta)}, in flip {member(flip(gamma), x, eta)}, "
          f"distance to cone {distance(x, eta, gamma):.3f}")

rng = np.random.default_rng(0)
x = rng.uniform(omega.lo, omega.hi, size=(2000, 2))
a = rng.uniform(0, 2 * np.pi, 2000)
eta = np.stack([np.cos(a), np.sin(a)], axis=1)

lam = complement(flip(gamma), omega)
print("complement agrees with 'not in flip' on every sample:",
      bool(np.all(member(lam, x, eta) ^ member(gamma, x, -eta))))

print("fraction of the complement of the cone captured by each exhaustion stage:")
target = member(complement(gamma, omega), x, eta)
for ell in (1, 2, 4, 8):
    inside = member(exhaustion(gamma, omega, ell).Lambda_ell, x, eta)
    print(f"  l={ell}: {inside.sum() / target.sum():.3f}")
