"""Evidence-graded tests of boundedness and convergence for sampled families.

A finite sample can never prove that a supremum is finite or that a
sequence converges, so every test here returns a :class:`Verdict` that
records the numbers it was based on: suprema and growth trends for
boundedness, successive-difference decay for convergence.  A ``fail``
always names the probe or seminorm and the value that triggered it.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .cones import ConePatch, ConeSet, in_dual_region, member, sample_directions
from .grid import Grid, SampledField, make_window
from .pairing import pair_direct
from .seminorms import SeminormSpec, eval_seminorm, wf_estimate

__all__ = [
    "REPORT_SCHEMA_VERSION",
    "TestPanel",
    "Verdict",
    "default_panel",
    "bounded_test",
    "convergence_test",
    "emit_report",
]

REPORT_SCHEMA_VERSION = 1
OUTCOMES = ("pass", "fail", "inconclusive")


@dataclass(frozen=True, eq=False)
class TestPanel:
    """Probes standing in for compactly supported test distributions, plus seminorms.

    Parameters
    ----------
    probes : list of SampledField
        Each probe's singular directions must stay in the dual region of
        ``gamma``.
    specs : list of SeminormSpec
        Each must satisfy ``(supp chi x V) ∩ gamma = ∅``.
    gamma : ConeSet
    provenance : str
        Free text describing how the panel was made; copied into reports.
    validate : bool
        Run the probe and spec checks at construction.
    """

    __test__ = False  # not a pytest class

    probes: tuple[SampledField, ...]
    specs: tuple[SeminormSpec, ...]
    gamma: ConeSet
    provenance: str = "user"
    validate: bool = True
    probe_window: float = field(default=0.5, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "probes", tuple(self.probes))
        object.__setattr__(self, "specs", tuple(self.specs))
        if self.validate:
            for i, s in enumerate(self.specs):
                bad = s.violation(self.gamma)
                if bad is not None:
                    raise ValueError(f"spec {i}: (x={bad[0]}, eta={bad[1]}) of supp chi x V lies in gamma")
            for i, p in enumerate(self.probes):
                bad = self._probe_violation(p)
                if bad is not None:
                    raise ValueError(f"probe {i}: estimated singular point {bad} lies outside the dual region")

    def _probe_violation(self, probe: SampledField):
        grid = probe.grid
        x = probe.support_box.center
        r = min(self.probe_window, float(np.min(grid.box.distance_to_exterior(x[None, :]))) / 2.5)
        if r <= 0:
            return None
        dirs = sample_directions(grid.n, 16)
        est = wf_estimate(probe, [tuple(x)], dirs, r)
        for s in est.singular_points():
            if not in_dual_region(self.gamma, s.x, s.eta):
                return (s.x, s.eta)
        return None

    def to_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "probes": len(self.probes),
            "specs": [{"N": s.N, "V": s.V.to_dict(), "chi_support": s.chi.support_box.to_dict()} for s in self.specs],
            "gamma": self.gamma.to_dict(),
        }


@dataclass(frozen=True)
class Verdict:
    """Outcome of one test with the numbers behind it.

    ``witness`` is required for ``fail`` and names what failed.
    """

    test: str
    outcome: str
    evidence: dict
    witness: dict | None = None

    def __post_init__(self):
        if self.outcome not in OUTCOMES:
            raise ValueError(f"outcome must be one of {OUTCOMES}")
        if self.outcome == "fail" and not self.witness:
            raise ValueError("a fail verdict needs a witness")

    @property
    def passed(self) -> bool:
        return self.outcome == "pass"

    def to_dict(self) -> dict:
        return {"test": self.test, "outcome": self.outcome, "evidence": self.evidence, "witness": self.witness}


def _window_radius_at(grid: Grid, c: np.ndarray, want: float) -> float:
    room = float(np.min(grid.box.distance_to_exterior(c[None, :])))
    return min(want, 0.45 * room)


def default_panel(gamma: ConeSet, grid: Grid, *, radius: float = 1.0, wave_number: float = 6.0, N: int = 2) -> TestPanel:
    """Eight windowed plane-wave packets, four smooth bumps and seminorms off ``gamma``.

    Packet centres lie on a circle of radius half the box half-width
    (two points in 1D) and their oscillation directions are drawn from the
    dual region at the centre.  One seminorm is attached to each bump
    centre, using a small cap around a direction whose ray avoids
    ``gamma`` over the window's support.
    """
    n = grid.n
    c0 = grid.box.center
    half = float(np.min(grid.box.lengths)) / 2
    if n == 1:
        centres = [c0 + np.array([s * half / 2]) for s in (-1.0, 1.0)] * 4
    else:
        ang = 2 * np.pi * np.arange(8) / 8
        centres = [c0 + half / 2 * np.array([np.cos(a), np.sin(a)]) for a in ang]
    dirs = sample_directions(n, 64)
    probes = []
    for i, c in enumerate(centres):
        r = _window_radius_at(grid, c, radius)
        allowed = dirs[in_dual_region(gamma, np.broadcast_to(c, dirs.shape), dirs)]
        if not len(allowed):
            continue
        d = allowed[(3 * i) % len(allowed)]
        w = make_window(c, r, grid)
        phase = np.exp(1j * wave_number * (grid.points @ d))
        probes.append(SampledField.masked(grid, w.values * phase, w.support_box))
    bump_centres = [c0 + half / 4 * np.array(v) for v in ([1.0], [-1.0], [0.5], [-0.5])] if n == 1 else [
        c0 + half / 4 * np.array(v) for v in ([1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0])
    ]
    specs = []
    for c in bump_centres:
        r = _window_radius_at(grid, c, radius)
        w = make_window(c, r, grid)
        probes.append(w)
        box = w.support_box
        corners = np.array(np.meshgrid(*zip(box.lo, box.hi), indexing="ij")).reshape(n, -1).T
        sample = np.concatenate([corners, box.center[None, :]])
        for d in dirs:
            cap = ConeSet(n, (ConePatch(box, tuple(d), 0.1 if n == 2 else 0.0),))
            spec = SeminormSpec(N, cap, w)
            if not np.any(member(gamma, sample, d)) and spec.admissible(gamma):
                specs.append(spec)
                break
    return TestPanel(tuple(probes), tuple(specs), gamma, provenance="default_panel", validate=False)


def _growth_exponent(values: np.ndarray) -> float | None:
    """Slope of log|value| against log(index); None when undefined."""
    idx = np.arange(1, len(values) + 1)
    ok = values > 0
    if ok.sum() < 3:
        return None
    return float(np.polyfit(np.log(idx[ok]), np.log(values[ok]), 1)[0])


def bounded_test(family, panel: TestPanel, *, sentinel: float = 1e6, phi: SampledField | None = None) -> Verdict:
    """Weak and seminorm boundedness of a finite family.

    Reports, per probe, ``max_i |<u_i, v>|`` and, per seminorm,
    ``max_i ||u_i||``, together with a fitted growth exponent of each
    sequence against the family index.  Fails if any supremum exceeds
    ``sentinel``.
    """
    family = list(family)
    if not family:
        raise ValueError("family must be nonempty")
    pair_vals = np.array([[abs(pair_direct(u, v, phi)) for u in family] for v in panel.probes]).reshape(
        len(panel.probes), len(family)
    )
    semi_vals = np.array([[eval_seminorm(u, s).value for u in family] for s in panel.specs]).reshape(
        len(panel.specs), len(family)
    )
    probe_sups = pair_vals.max(axis=1) if len(family) else np.zeros(0)
    spec_sups = semi_vals.max(axis=1)
    evidence = {
        "family_size": len(family),
        "sentinel": sentinel,
        "probe_sups": [float(a) for a in probe_sups],
        "spec_sups": [float(a) for a in spec_sups],
        "probe_growth": [_growth_exponent(r) for r in pair_vals],
        "spec_growth": [_growth_exponent(r) for r in semi_vals],
    }
    for kind, table in (("probe", pair_vals), ("spec", semi_vals)):
        for j, row in enumerate(table):
            over = np.nonzero(~(row <= sentinel))[0]
            if len(over):
                i = int(over[0])
                return Verdict("bounded", "fail", evidence, {"kind": kind, "index": j, "member": i, "value": float(row[i])})
    return Verdict("bounded", "pass", evidence)


NOISE = 1e-12


def _l2(f: SampledField) -> float:
    return float(np.sqrt(np.sum(np.abs(f.values) ** 2) * f.grid.cell_volume))


def _denoise(d: np.ndarray, floor: float) -> np.ndarray:
    """Zero entries at roundoff level relative to an a priori bound."""
    return np.where(d <= floor, 0.0, d)


def _thirds(d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    t = max(1, int(np.ceil(len(d) / 3)))
    return d[:t], d[-t:]


def _decays(d: np.ndarray, ratio: float) -> bool:
    first, last = _thirds(d)
    return bool(np.max(last) <= ratio * np.max(first))


def convergence_test(
    sequence,
    panel: TestPanel,
    limit_hint: SampledField | None = None,
    *,
    cauchy_ratio: float = 0.01,
    limit_ratio: float = 0.1,
    envelope=None,
    phi: SampledField | None = None,
) -> Verdict:
    """Cauchy behaviour of a sequence, tested on probes and seminorms.

    Parameters
    ----------
    sequence : list of SampledField
        At least three members.
    panel : TestPanel
    limit_hint : SampledField, optional
        Candidate limit.  When given, ``|<u_i - u, v>|`` and
        ``||u_i - u||`` must also shrink: their maximum over the last third
        of the sequence is at most ``limit_ratio`` times that over the first
        third.
    cauchy_ratio : float
        Successive differences pass when their maximum over the last third
        is at most this fraction of the maximum over the first third.
    envelope : array_like, optional
        Expected size of the successive differences, one positive entry
        per difference.  When given, differences are divided by it and the
        rescaled values must not grow from the first third to the last.
    phi : SampledField, optional
        Cutoff passed to the pairing.

    Notes
    -----
    A seminorm of a difference that peaks at the edge of the frequency
    band in the last third is reported as a failure witness: the lattice is
    cutting off a singularity that does not go away.
    """
    seq = list(sequence)
    if len(seq) < 3:
        raise ValueError("need at least three members")
    diffs = [b - a for a, b in zip(seq, seq[1:])]
    if envelope is not None:
        env = np.asarray(envelope, float)
        if env.shape != (len(diffs),) or np.any(env <= 0):
            raise ValueError("envelope needs one positive entry per successive difference")
        threshold = 1.0 + 1e-9
    else:
        env = np.ones(len(diffs))
        threshold = cauchy_ratio
    evidence: dict = {"length": len(seq), "cauchy_ratio": cauchy_ratio, "probes": [], "specs": []}
    witness = None

    # |<u, v>| <= ||u||_2 ||v||_2 and |(u chi)^| <= ||u chi||_1 bound what
    # roundoff can produce, so values far below them count as zero
    u_l2 = max(_l2(u) for u in seq)
    for j, v in enumerate(panel.probes):
        floor = NOISE * u_l2 * _l2(v)
        vals = np.array([pair_direct(u, v, phi) for u in seq])
        d = _denoise(np.abs(np.diff(vals)), floor)
        rec = {"differences": [float(a) for a in d]}
        if limit_hint is not None:
            err = _denoise(np.array([abs(pair_direct(u - limit_hint, v, phi)) for u in seq]), floor)
            rec["limit_errors"] = [float(a) for a in err]
            if witness is None and not _decays(err, limit_ratio) and np.max(err) > 0:
                witness = {"kind": "probe_limit", "index": j, "value": float(err[-1])}
        if witness is None and np.max(d) > 0 and not _decays(d / env, threshold):
            witness = {"kind": "probe", "index": j, "value": float(np.max(_thirds(d)[1]))}
        evidence["probes"].append(rec)

    last_start = len(diffs) - len(_thirds(np.zeros(len(diffs)))[1])
    for j, s in enumerate(panel.specs):
        l1 = max(float(np.sum(np.abs(u.values * s.chi.values))) * u.grid.cell_volume for u in seq)
        floor = NOISE * (1 + s.chi.grid.k_max) ** s.N * l1
        sv = [eval_seminorm(dd, s) for dd in diffs]
        d = _denoise(np.array([x.value for x in sv]), floor)
        sat = [i for i, x in enumerate(sv) if x.saturated and d[i] > 0 and i >= last_start]
        rec = {"differences": [float(a) for a in d], "saturated": sat}
        if limit_hint is not None:
            err = _denoise(np.array([eval_seminorm(u - limit_hint, s).value for u in seq]), floor)
            rec["limit_errors"] = [float(a) for a in err]
            if witness is None and not _decays(err, limit_ratio) and np.max(err) > 0:
                witness = {"kind": "spec_limit", "index": j, "value": float(err[-1])}
        if witness is None and sat:
            witness = {"kind": "spec_saturated", "index": j, "difference": sat[0], "value": float(d[sat[0]])}
        if witness is None and np.max(d) > 0 and not _decays(d / env, threshold):
            witness = {"kind": "spec", "index": j, "value": float(np.max(_thirds(d)[1]))}
        evidence["specs"].append(rec)

    if witness is not None:
        return Verdict("convergence", "fail", evidence, witness)
    return Verdict("convergence", "pass", evidence)


def _canonical(obj):
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else repr(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _flatten(prefix: str, obj, out: list):
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else str(k), obj[k], out)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append((prefix, obj))


def emit_report(verdicts, format: str = "json", *, meta: dict | None = None) -> str:
    """Serialize verdicts deterministically.

    Parameters
    ----------
    verdicts : list of Verdict
    format : {"json", "csv"}
    meta : dict, optional
        Extra provenance (tool version, config hash) stored in the header.

    Returns
    -------
    str
        JSON with sorted keys, or CSV with columns ``test, outcome, key,
        value`` where the evidence is flattened into dotted keys.
    """
    doc = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "meta": _canonical(meta or {}),
        "verdicts": [_canonical(v.to_dict()) for v in verdicts],
    }
    if format == "json":
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["schema_version", REPORT_SCHEMA_VERSION])
        for k, v in sorted(doc["meta"].items()):
            w.writerow(["meta", k, v])
        w.writerow(["test", "outcome", "key", "value"])
        for v in doc["verdicts"]:
            rows: list = []
            _flatten("evidence", v["evidence"], rows)
            if v["witness"]:
                _flatten("witness", v["witness"], rows)
            if not rows:
                rows = [("", "")]
            for key, val in rows:
                w.writerow([v["test"], v["outcome"], key, repr(val) if isinstance(val, float) else val])
        return buf.getvalue()
    raise ValueError(f"unknown report format {format!r}")
