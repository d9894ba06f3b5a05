"""Numerical toolkit for wavefront sets, cone-restricted seminorms and
the weak-versus-Hörmander topology gap on spaces of distributions.

Submodules
----------
grid            sampled fields, windows, discrete Fourier transforms
cones           closed conic sets, flips, complements and exhaustions
seminorms       directional decay, seminorms and wavefront estimates
pairing         conic partitions and the split pairing bound
counterexample  the singular sequence that is bounded but not convergent
diagnostics     boundedness and convergence verdicts on a test panel
cli             command-line front end
"""

__version__ = "0.1.0"

from .cones import ConePatch, ConeSet, exhaustion, flip, complement, member  # noqa: E402
from .grid import Box, Grid, SampledField, SpectralField, make_window, dft_forward, dft_inverse  # noqa: E402
from .seminorms import SeminormSpec, decay_profile, eval_seminorm, wf_estimate  # noqa: E402

__all__ = [
    "__version__",
    "Box",
    "Grid",
    "SampledField",
    "SpectralField",
    "make_window",
    "dft_forward",
    "dft_inverse",
    "ConePatch",
    "ConeSet",
    "exhaustion",
    "flip",
    "complement",
    "member",
    "SeminormSpec",
    "decay_profile",
    "eval_seminorm",
    "wf_estimate",
]
