"""Sampled fields, the discrete transform and what it resolves.

A smooth window's transform decays fast, an indicator's transform decays
like 1/k, and shifting a field only changes the phase of its transform.
"""

import numpy as np

from microlocal import Grid, dft_forward, dft_inverse, make_window
from microlocal.grid import SampledField, translate

grid = Grid.default(1)
print(f"grid: {grid.shape[0]} points on {grid.box}, band limit k_max = {grid.k_max:.1f}")

bump = make_window([0.0], 1.0, grid)
step = SampledField.from_function(grid, lambda x: (np.abs(x[..., 0]) < 1.0).astype(float))
high = grid.freq_norm > grid.k_max / 2

for name, f in (("smooth window", bump), ("indicator of [-1, 1]", step)):
    mag = np.abs(dft_forward(f).values)
    print(f"{name:>22}: peak {mag.max():.3f}, largest value in the upper half of the band {mag[high].max():.2e}")

back = dft_inverse(dft_forward(bump))
print(f"round-trip error: {np.max(np.abs(back.values - bump.values)):.1e}")

F0 = dft_forward(bump).values
F1 = dft_forward(translate(bump, [0.5])).values
live = np.abs(F0) > 1e-8 * np.abs(F0).max()
print(f"shift by 0.5: largest change in |f^| is {np.max(np.abs(np.abs(F1[live]) - np.abs(F0[live]))):.1e}")
