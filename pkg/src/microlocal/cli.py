"""Command-line front end.

Usage::

    microlocal [--config FILE] [--out DIR] [--seed N] COMMAND [options]

Commands write JSON and CSV artifacts into the output directory (default
``$MICROLOCAL_OUT`` or ``./microlocal-out``).  Exit status is 0 on
success, 1 when a check fails and 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bank import random_smooth_field
from .cones import ConePatch, ConeSet, cone_from_json, sample_directions
from .config import Config, ConfigError, config_hash, load_config
from .counterexample import (
    HormanderParams,
    ball_lattice,
    cauchy_rates,
    choose_sequence,
    counterexample_grid,
    find_boundary_point,
    gamma_cone,
    hormander_field,
    partial_sum,
    singularity_persistence,
    step2_bound,
    verify_eq10,
)
from .diagnostics import bounded_test, convergence_test, default_panel, emit_report
from .grid import Box, Grid, SampledField, load_field, make_window
from .pairing import build_conic_partition, eval_eq3_bound, pair_split
from .seminorms import SeminormSpec, check_eq5_bound, check_product_rule, decay_profile, eval_seminorm, wf_estimate

__all__ = ["main", "run", "build_parser", "UsageError"]

OUT_ENV = "MICROLOCAL_OUT"


class UsageError(Exception):
    """Bad command-line input; maps to exit status 2."""


class Artifacts:
    """Deterministic writer that stamps every file with version and config hash."""

    def __init__(self, root: Path, cfg: Config):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.cfg = cfg
        self.stamp = {"tool_version": __version__, "config_hash": config_hash(cfg)}
        self.written: list[Path] = []

    def json(self, name: str, payload: dict) -> Path:
        doc = {"provenance": {**self.stamp, "config": self.cfg.to_dict()}, **payload}
        return self._write(name, json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n")

    def csv(self, name: str, text: str) -> Path:
        head = f"# tool_version={self.stamp['tool_version']} config_hash={self.stamp['config_hash']}\n"
        return self._write(name, head + text)

    def text(self, name: str, text: str) -> Path:
        return self._write(name, text)

    def _write(self, name: str, text: str) -> Path:
        p = self.root / name
        p.write_text(text)
        self.written.append(p)
        return p


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else repr(f)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _grid(cfg: Config, n: int | None = None) -> Grid:
    n = cfg.grid.n if n is None else n
    if cfg.grid.points == 0 and cfg.grid.half_width == 8.0:
        return Grid.default(n)
    pts = cfg.grid.points or (4096 if n == 1 else 512)
    return Grid(Box.cube(n, cfg.grid.half_width), (pts,) * n)


def _floats(text: str | None, n: int | None = None) -> np.ndarray | None:
    if text is None:
        return None
    try:
        vals = np.array([float(a) for a in text.split(",")])
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None
    if n is not None and vals.size != n:
        raise UsageError(f"expected {n} numbers, got {text!r}")
    return vals


def _direction(angle: float | None, n: int, default: float = 0.0) -> np.ndarray:
    if n == 1:
        return np.array([1.0 if (angle if angle is not None else default) >= 0 else -1.0])
    a = default if angle is None else angle
    return np.array([np.cos(a), np.sin(a)])


def _load_cone(path: str | None, n: int) -> ConeSet | None:
    if path is None:
        return None
    try:
        cone = cone_from_json(Path(path).read_text())
    except (OSError, ValueError, KeyError) as e:
        raise UsageError(f"cannot read cone file {path}: {e}") from None
    if cone.n != n:
        raise UsageError(f"cone file {path} has dimension {cone.n}, expected {n}")
    return cone


def _load(path: str | None) -> SampledField | None:
    if path is None:
        return None
    try:
        return load_field(path)
    except (OSError, ValueError, KeyError) as e:
        raise UsageError(f"cannot read field file {path}: {e}") from None


def _demo_field(kind: str, grid: Grid, s: float, eta: np.ndarray, rho: float) -> SampledField:
    if kind == "bump":
        return make_window(np.zeros(grid.n), 1.0, grid)
    if kind == "hormander":
        return hormander_field(HormanderParams(tuple(eta), s, rho), grid)
    raise UsageError(f"unknown demo field {kind!r}")


def default_gamma(n: int, grid: Grid) -> ConeSet:
    """Half-space cone in 1D, a single closed cap in 2D."""
    if n == 1:
        return ConeSet(1, (ConePatch(Box((0.0,), (float(grid.box.hi[0]),)), (-1.0,), 0.0),))
    return ConeSet(2, (ConePatch(grid.box, (-1.0, 0.0), 0.5),))


# -- commands ------------------------------------------------------------------


def cmd_eq10(a, cfg: Config, out: Artifacts) -> int:
    n = a.n or cfg.grid.n
    if a.s < 0:
        raise UsageError("--s must be >= 0")
    spacing = a.spacing or (0.25 if n == 1 else 1.0)
    params = HormanderParams(tuple(_direction(a.angle, n)), a.s, a.rho if a.rho is not None else cfg.counterexample.rho)
    rep = verify_eq10(params, ball_lattice(n, a.radius, spacing))
    out.json("eq10.json", {"command": "eq10", "n": n, "radius": a.radius, "spacing": spacing, "report": rep.to_dict()})
    print(f"eq10 s={a.s:g} n={n}: max_ratio={rep.max_ratio:.6g} violations={rep.violations}/{rep.points}")
    return 0 if rep.holds else 1


def cmd_eq5(a, cfg: Config, out: Artifacts) -> int:
    n = a.n or cfg.grid.n
    grid = _grid(cfg, n)
    rng = np.random.default_rng(cfg.run.seed)
    rows = []
    ok = True
    for i in range(a.count):
        f = random_smooth_field(grid, rng)
        c = rng.uniform(-1.0, 1.0, size=n)
        chi = make_window(c, 1.0, grid)
        K = chi.support_box
        for N in a.N:
            r5 = check_eq5_bound(f, chi, N, K)
            rp = check_product_rule(f, chi, N, K)
            ok &= r5.holds and rp.holds
            rows.append(
                {"field": i, "N": N, "eq5_lhs": r5.lhs_max, "eq5_rhs": r5.rhs, "eq5_holds": r5.holds,
                 "product_lhs": rp.lhs, "product_rhs": rp.rhs, "product_holds": rp.holds}
            )
    out.json("eq5.json", {"command": "eq5", "n": n, "rows": rows, "holds": ok})
    print(f"eq5 n={n}: {sum(r['eq5_holds'] and r['product_holds'] for r in rows)}/{len(rows)} checks hold")
    return 0 if ok else 1


def cmd_wf(a, cfg: Config, out: Artifacts) -> int:
    field = _load(a.field)
    n = field.n if field is not None else (a.n or cfg.grid.n)
    grid = field.grid if field is not None else _grid(cfg, n)
    eta = _direction(a.angle, n)
    if field is None:
        field = _demo_field(a.demo, grid, a.s, eta, cfg.counterexample.rho)
    pts = np.array([_floats(p, n) for p in a.x.split(";")]) if a.x else np.zeros((1, n))
    dirs = sample_directions(n, a.directions or cfg.cones.directions)
    sm = cfg.seminorms
    fit = (sm.fit_lo, sm.fit_hi or None)
    est = wf_estimate(field, pts, dirs, a.radius or sm.window_radius, (sm.s_singular, sm.s_regular),
                      window=sm.window, fit_range=fit)
    out.csv("wf.csv", est.to_csv())
    out.json("wf.json", {"command": "wf", "estimate": est.to_dict()})
    counts = {v: est.verdicts().count(v) for v in ("singular", "regular", "inconclusive")}
    print(f"wf: {counts}")
    return 0


def cmd_seminorm(a, cfg: Config, out: Artifacts) -> int:
    field = _load(a.field)
    n = field.n if field is not None else (a.n or cfg.grid.n)
    grid = field.grid if field is not None else _grid(cfg, n)
    if field is None:
        field = _demo_field(a.demo, grid, a.s, _direction(a.angle, n), cfg.counterexample.rho)
    center = _floats(a.center, n) if a.center else np.zeros(n)
    chi = make_window(center, a.radius or cfg.seminorms.window_radius, grid)
    cap = ConeSet(n, (ConePatch(chi.support_box, tuple(_direction(a.cap, n, np.pi)), a.cap_radius),))
    gamma = _load_cone(a.gamma, n)
    rows = []
    for N in (a.N or cfg.seminorms.N):
        spec = SeminormSpec(N, cap, chi)
        if gamma is not None and not spec.admissible(gamma):
            raise UsageError("supp chi x V meets gamma: this seminorm is not defined on the space")
        val = eval_seminorm(field, spec, k_max=cfg.seminorms.k_max or None)
        rows.append({"N": N, "value": val.value, "k_star": val.k_star, "saturated": val.saturated, "empty": val.empty})
    out.json("seminorm.json", {"command": "seminorm", "rows": rows})
    for r in rows:
        print(f"N={r['N']}: {r['value']:.6g}{' (saturated)' if r['saturated'] else ''}")
    return 0


def cmd_pair(a, cfg: Config, out: Artifacts) -> int:
    u, v = _load(a.u), _load(a.v)
    n = (u or v).n if (u or v) is not None else (a.n or cfg.grid.n)
    grid = (u or v).grid if (u or v) is not None else _grid(cfg, n)
    rng = np.random.default_rng(cfg.run.seed)
    if u is None:
        u = random_smooth_field(grid, rng)
    if v is None:
        # the middle quarter keeps the partition windows around supp v inside the box
        c, q = grid.box.center, grid.box.lengths / 8
        v = random_smooth_field(grid, rng, bumps=2, region=Box(tuple(c - q), tuple(c + q)))
    gamma = _load_cone(a.gamma, n) or ConeSet.empty(n)
    wf = _load_cone(a.wf, n) or ConeSet.empty(n)
    K = v.support_box.expand(0.25).intersect(grid.box)
    part = build_conic_partition(gamma, wf, K, a.budget, grid=grid, margin=cfg.cones.margin)
    rep = pair_split(u, v, part)
    bound = eval_eq3_bound(u, v, part, a.N, a.M)
    out.json("pair.json", {"command": "pair", "split": rep.to_dict(), "bound": bound.to_dict(), "partition": part.to_dict()})
    lines = ["piece,I1_re,I1_im,I2_re,I2_im,I3_re,I3_im,I4_re,I4_im,p_term,tail_term,cross_term"]
    print(f"{'piece':>5} {'|I1|':>10} {'|I2|':>10} {'|I3|':>10} {'|I4|':>10} {'p':>10} {'tail':>10} {'cross':>10}")
    for j, (I, b) in enumerate(zip(rep.pieces, bound.pieces)):
        print(f"{j:>5} " + " ".join(f"{abs(z):10.3e}" for z in I) + f" {b.p_term:10.3e} {b.tail_term:10.3e} {b.cross_term:10.3e}")
        parts = [f"{x:.17g}" for z in I for x in (z.real, z.imag)]
        lines.append(",".join([str(j), *parts, f"{b.p_term:.17g}", f"{b.tail_term:.17g}", f"{b.cross_term:.17g}"]))
    out.csv("pair.csv", "\n".join(lines) + "\n")
    print(f"direct={rep.direct:.12g} split={rep.total:.12g} rel.discrepancy={rep.relative_discrepancy:.3g}")
    print(f"bound: rhs={bound.rhs_total:.6g} >= |<u,v>|={bound.lhs:.6g}: {bound.holds}")
    return 0 if (rep.relative_discrepancy <= 1e-8 or rep.discrepancy <= 1e-12) and bound.holds else 1


def _counterexample_setup(n: int, cfg: Config, a):
    grid = counterexample_grid(n) if not a.points else Grid(
        Box.cube(n, 16.0 if n == 2 else 8.0), (a.points,) * n
    )
    gamma = _load_cone(a.gamma, n) or default_gamma(n, grid)
    if n == 1:
        seed = ((0.3,), (1.0,))
    else:
        seed = ((0.0, 0.0), (1.0, 0.3))
    boundary = find_boundary_point(gamma, *seed)
    M_max = a.Mmax if a.Mmax is not None else cfg.counterexample.M_max
    if M_max < 1:
        raise UsageError("--Mmax must be at least 1")
    plan = choose_sequence(boundary, gamma, M_max, grid=grid, layout=cfg.counterexample.layout,
                           ratio=cfg.counterexample.ratio)
    return grid, gamma, plan


def cauchy_specs(plan, grid: Grid, M: int) -> list[SeminormSpec]:
    """Seminorms admissible for the cone of the tails from ``M`` on.

    One wide window looking opposite to the boundary direction, and one
    small window at each ``x_j`` (``j <= M``) looking along ``eta_j``.
    """
    n = grid.n
    half = float(np.min(grid.box.lengths)) / 2
    wide = make_window(grid.box.center, half / 2 - 0.01, grid)
    eta = np.asarray(plan.eta)
    V = ConeSet(n, (ConePatch(wide.support_box, tuple(-eta), 1.0 if n == 2 else 0.0),))
    specs = [SeminormSpec(2, V, wide), SeminormSpec(0, V, wide)]
    if n == 2:
        for t in plan.terms[:M]:
            w = make_window(t.x, 1.0, grid)
            specs.append(SeminormSpec(1, ConeSet(2, (ConePatch(w.support_box, t.eta, t.rho / 8),)), w))
    return specs


def cmd_counterexample(a, cfg: Config, out: Artifacts) -> int:
    n = a.n or cfg.grid.n
    rho = a.rho if a.rho is not None else cfg.counterexample.rho
    if not (0 < rho < 1):
        raise UsageError("--rho must lie in (0, 1)")
    grid, gamma, plan = _counterexample_setup(n, cfg, a)
    for M in range(plan.M_max + 1):
        gamma_cone(plan, M)
    out.json("plan.json", {"command": "counterexample", "plan": plan.to_dict(), "violations": plan.check()})
    S = partial_sum(plan, plan.M_max, grid, rho)
    for m, t in enumerate(plan.terms, 1):
        r = plan.measurement_radius(m)
        lo = max(32.0, 32.0 / r)
        prof = decay_profile(S, t.x, t.eta, r, window="gauss", fit_range=(lo, None), lambda_min=lo)
        out.csv(f"decay_m{m}.csv", prof.to_csv())
    orders = range(1, min(5, plan.M_max - 1) + 1) if plan.M_max > 1 else range(1, 2)
    rows = singularity_persistence(plan, grid, rho, orders=orders)
    lines = ["m,exponent_sum,exponent_term,window_radius,within_half"]
    persist_ok = True
    for r in rows:
        ok = bool(abs(r.exponent_sum - r.m) <= 0.5)
        persist_ok &= ok
        lines.append(f"{r.m},{r.exponent_sum:.17g},{r.exponent_term:.17g},{r.window_radius:.17g},{ok}")
    out.csv("persistence.csv", "\n".join(lines) + "\n")
    M = 1 if plan.M_max > 1 else 0
    pairs = [(p, q) for q in range(M, plan.M_max + 1) for p in range(q, plan.M_max + 1)]
    rep = cauchy_rates(plan, cauchy_specs(plan, grid, M), pairs, grid, M, rho)
    out.csv("cauchy.csv", rep.to_csv())
    f = make_window(np.asarray(plan.x), 0.5, grid)
    s2 = step2_bound(plan, f, grid, rho)
    out.json(
        "summary.json",
        {
            "command": "counterexample",
            "persistence_ok": persist_ok,
            "cauchy": {"M": rep.M, "constants": list(rep.constants), "dominated": rep.dominated, "monotone": rep.monotone},
            "step2": {"C_n": s2.C_n, "I": s2.I, "pairings": list(s2.pairings), "bounds": list(s2.bounds),
                      "cap": s2.cap, "holds": s2.holds},
        },
    )
    print(f"counterexample n={n} M_max={plan.M_max}: plan ok, persistence "
          f"{'ok' if persist_ok else 'FAILED'}, cauchy dominated={rep.dominated}, step2 holds={s2.holds}")
    for r in rows:
        print(f"  m={r.m}: exponent of S_M={r.exponent_sum:.3f}, of v_m/m! alone={r.exponent_term:.3f}")
    return 0 if persist_ok and rep.dominated and s2.holds else 1


def cmd_diagnose(a, cfg: Config, out: Artifacts) -> int:
    n = a.n or cfg.grid.n
    grid = _grid(cfg, n)
    gamma = _load_cone(a.gamma, n) or default_gamma(n, grid)
    panel = default_panel(gamma, grid)
    u = make_window(np.zeros(n), 0.5, grid)
    d = cfg.diagnostics
    verdicts = []
    fam = a.family
    if fam == "harmonic":
        seq = [u / float(i) for i in range(1, 31)]
        verdicts.append(bounded_test(seq, panel, sentinel=d.sentinel))
        verdicts.append(convergence_test(seq, panel, SampledField.zeros(grid), cauchy_ratio=d.cauchy_ratio,
                                         limit_ratio=d.limit_ratio))
    elif fam == "scaled":
        verdicts.append(bounded_test([u * float(c) for c in range(1, 101)], panel, sentinel=a.sentinel or d.sentinel))
    elif fam == "dilates":
        fam_list = []
        for lam in np.linspace(1.0, 3.0, 9):
            vals = make_window(np.zeros(n), 0.5 * lam, grid).values / lam**n
            fam_list.append(SampledField(grid, vals))
        verdicts.append(bounded_test(fam_list, panel, sentinel=d.sentinel))
    else:
        raise UsageError(f"unknown family {fam!r}")
    meta = {**out.stamp, "family": fam, "panel": panel.provenance}
    out.text("diagnose.json", emit_report(verdicts, "json", meta=meta))
    out.text("diagnose.csv", emit_report(verdicts, "csv", meta=meta))
    for v in verdicts:
        print(f"{v.test}: {v.outcome}" + (f" witness={v.witness}" if v.witness else ""))
    return 0 if all(v.passed for v in verdicts) else 1


COMMANDS = {
    "eq10": cmd_eq10,
    "eq5": cmd_eq5,
    "wf": cmd_wf,
    "seminorm": cmd_seminorm,
    "pair": cmd_pair,
    "counterexample": cmd_counterexample,
    "diagnose": cmd_diagnose,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="microlocal", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="INI configuration file")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./microlocal-out)")
    p.add_argument("--seed", type=int, help="override run.seed")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def dim(sp):
        sp.add_argument("--n", type=int, choices=(1, 2))

    sp = sub.add_parser("eq10", help="scan the closed-form decay bound on a ball lattice")
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--radius", type=float, default=512.0)
    sp.add_argument("--spacing", type=float)
    sp.add_argument("--angle", type=float, help="direction angle (2D)")
    sp.add_argument("--rho", type=float)
    dim(sp)

    sp = sub.add_parser("eq5", help="derivative bound on windowed transforms and product rule")
    sp.add_argument("--N", type=int, nargs="+", default=[0, 1, 2, 3])
    sp.add_argument("--count", type=int, default=10)
    dim(sp)

    for name, hlp in (("wf", "classify directions by decay"), ("seminorm", "evaluate seminorms of a field")):
        sp = sub.add_parser(name, help=hlp)
        sp.add_argument("--field", help="field header written by save_field")
        sp.add_argument("--demo", choices=("bump", "hormander"), default="hormander")
        sp.add_argument("--s", type=float, default=3.0)
        sp.add_argument("--angle", type=float, help="direction angle of the demo field (2D)")
        sp.add_argument("--radius", type=float, help="window plateau radius")
        dim(sp)
        if name == "wf":
            sp.add_argument("--x", help="sample points 'x0,y0;x1,y1'")
            sp.add_argument("--directions", type=int)
        else:
            sp.add_argument("--center", help="window centre 'x,y'")
            sp.add_argument("--cap", type=float, help="cap centre angle (2D) or sign (1D)")
            sp.add_argument("--cap-radius", type=float, default=0.5)
            sp.add_argument("--N", type=int, nargs="+")
            sp.add_argument("--gamma", help="cone JSON the seminorm must avoid")

    sp = sub.add_parser("pair", help="direct and split pairing with the term-by-term bound")
    sp.add_argument("--u")
    sp.add_argument("--v")
    sp.add_argument("--gamma", help="cone JSON carried by u")
    sp.add_argument("--wf", help="cone JSON containing the singular directions of v")
    sp.add_argument("--N", type=int, default=2)
    sp.add_argument("--M", type=int, default=4)
    sp.add_argument("--budget", type=int, default=256)
    dim(sp)

    sp = sub.add_parser("counterexample", help="build the singular sequence and measure it")
    sp.add_argument("--rho", type=float)
    sp.add_argument("--Mmax", type=int)
    sp.add_argument("--points", type=int, help="grid points per axis")
    sp.add_argument("--gamma", help="cone JSON to start from")
    dim(sp)

    sp = sub.add_parser("diagnose", help="boundedness and convergence evidence on a probe panel")
    sp.add_argument("--family", choices=("harmonic", "scaled", "dilates"), default="harmonic")
    sp.add_argument("--sentinel", type=float)
    sp.add_argument("--gamma")
    dim(sp)
    return p


def run(command: str, config: Config, inputs: dict, out_dir=None) -> int:
    """Run one subcommand with already-parsed options; returns the exit status."""
    if command not in COMMANDS:
        raise UsageError(f"unknown command {command!r}")
    out_dir = out_dir or os.environ.get(OUT_ENV) or "microlocal-out"
    art = Artifacts(Path(out_dir), config)
    ns = argparse.Namespace(**inputs)
    return COMMANDS[command](ns, config, art)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args.config) if args.config else Config()
        if args.seed is not None:
            cfg = cfg.replace(run={"seed": args.seed})
        inputs = {k: v for k, v in vars(args).items() if k not in ("config", "out", "seed", "command")}
        return run(args.command, cfg, inputs, args.out)
    except (UsageError, ConfigError) as e:
        print(f"microlocal: error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        # parameter errors raised by the library
        print(f"microlocal: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
