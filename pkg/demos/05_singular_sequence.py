"""A sequence that converges in the cone topology towards a boundary point.

Starting from a closed cone ``gamma`` and a point (x; eta) on the edge of
the region its flip leaves free, the plan picks points (x_m; eta_m)
outside ``gamma`` whose directions close in on eta.  In 2D the points are
spread around a circle so that each term can be measured on its own.  Each term v_m/m! is singular of
order m at its own point only.  The partial sums S_M stay bounded in every
admissible seminorm at the 10^k/k! rate, while every term's singularity
survives in the sum.  Runs in 2D (about half a minute).
"""

import numpy as np

from microlocal.cli import cauchy_specs, default_gamma
from microlocal.counterexample import (
    cauchy_rates,
    choose_sequence,
    counterexample_grid,
    find_boundary_point,
    gamma_cone,
    singularity_persistence,
    step2_bound,
)
from microlocal.cones import member
from microlocal.grid import make_window

grid = counterexample_grid(2)
gamma = default_gamma(2, grid)
plan = choose_sequence(find_boundary_point(gamma, (0.0, 0.0), (1.0, 0.3)), gamma, 6, grid=grid)

print(f"boundary point x={plan.x}, eta=({plan.eta[0]:.3f}, {plan.eta[1]:.3f})")
print("plan inequalities violated:", plan.check() or "none")
for m, t in enumerate(plan.terms, 1):
    print(f"  m={m}: x_m=({t.x[0]:+.3f}, {t.x[1]:+.3f}) eta_m=({t.eta[0]:.3f}, {t.eta[1]:+.3f}) rho_m={t.rho:.4f}")

g3 = gamma_cone(plan, 3).cone
print("\nenlarged cone for M=3 contains (x; eta):", member(g3, plan.x, plan.eta),
      "| excludes the first three term points:", not any(member(g3, t.x, t.eta) for t in plan.terms[:3]))

print("\nsingularity of each term inside S_6 (fitted decay exponent, expected m):")
for r in singularity_persistence(plan, grid, orders=range(1, 6)):
    print(f"  m={r.m}: {r.exponent_sum:.2f}")

pairs = [(p, q) for q in range(1, 7) for p in range(q, 7)]
rep = cauchy_rates(plan, cauchy_specs(plan, grid, 1), pairs, grid, 1)
worst = max(r.ratio for r in rep.rows)
print(f"\nseminorms of S_p - S_q against C * sum 10^k/k!: worst ratio {worst:.3f}, dominated {rep.dominated}")

s2 = step2_bound(plan, make_window(np.asarray(plan.x), 0.5, grid), grid)
print(f"pairings with a test window stay below their bounds: {s2.holds} (cap {s2.cap:.4g})")
