"""Evidence for boundedness and convergence of a family of fields.

A panel pairs each field with fixed test fields and evaluates admissible
seminorms.  Verdicts carry the numbers behind them and, on failure, a
witness naming the probe or seminorm that gave it away.
"""

from microlocal import Grid, make_window
from microlocal.cli import default_gamma
from microlocal.diagnostics import bounded_test, convergence_test, default_panel, emit_report
from microlocal.grid import SampledField

grid = Grid.default(1)
panel = default_panel(default_gamma(1, grid), grid)
print(f"panel: {len(panel.probes)} probes, {len(panel.specs)} seminorms")

bump = make_window([0.5], 1.0, grid)
shrinking = [bump / float(i) for i in range(1, 31)]
growing = [bump * float(c) for c in range(1, 101)]

verdicts = [
    bounded_test(shrinking, panel),
    convergence_test(shrinking, panel, limit_hint=SampledField.zeros(grid)),
    bounded_test(growing, panel, sentinel=10.0),
    convergence_test([bump * (-1.0) ** i for i in range(12)], panel),
]
for v in verdicts:
    print(f"{v.test:>12}: {v.outcome}" + (f"  witness {v.witness}" if v.witness else ""))

print("\nfirst lines of the CSV report:")
print("\n".join(emit_report(verdicts, "csv").splitlines()[:6]))
