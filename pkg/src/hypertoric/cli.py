"""Command-line entry point.

Every command prints a JSON report on stdout (carrying the run manifest) and
a one-line summary on stderr. Exit status: 0 success/PASS, 1 validation
FAIL, 2 schema, domain or numerical errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import arrangement, config, io, metric, moment, periodic
from .errors import DomainError, HypertoricError, NoCertifiedTail

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _box(text):
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    try:
        vals = [config.number(p) for p in parts]
    except HypertoricError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if len(vals) == 1:
        return vals[0]
    if len(vals) % 2:
        raise argparse.ArgumentTypeError("box needs one value or lo,hi pairs")
    return [(vals[i], vals[i + 1]) for i in range(0, len(vals), 2)]


def _positive(kind):
    def parse(text):
        v = kind(text)
        if not v > 0:
            raise argparse.ArgumentTypeError("must be positive")
        return v
    return parse


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypertoric", description="Hypertoric configuration toolkit.")
    p.add_argument("--seed", type=int, default=0, help="Seed for any random sampling (recorded).")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="Convergence certificate and smoothness check.")
    v.add_argument("config")
    v.add_argument("--window", type=_nonneg_int, default=50)
    v.add_argument("--tol", type=_positive(float), default=None)
    v.add_argument("--exhaustive", action="store_true", help="Collect every violation.")

    t = sub.add_parser("topology", help="Chambers, bounded polytopes and intersection poset.")
    t.add_argument("config")
    t.add_argument("--window", type=_nonneg_int, default=3)
    t.add_argument("--box", type=_box, default=10)
    t.add_argument("--no-poset", action="store_true")
    t.add_argument("--plot-data", help="Write 2-d plot data (JSON) to this path.")

    e = sub.add_parser("eval", help="Potential (and optionally metric) at points.")
    e.add_argument("config")
    e.add_argument("points")
    e.add_argument("--trunc", type=_nonneg_int, default=50)
    e.add_argument("--max-trunc", type=_nonneg_int, default=None)
    e.add_argument("--gram", action="store_true", help="Include the 4n x 4n metric.")
    e.add_argument("--csv", help="Also write a CSV table to this path.")

    i = sub.add_parser("identities", help="Polyharmonic and monopole residuals.")
    i.add_argument("config")
    i.add_argument("points", nargs="?", help="Points CSV; random points when omitted.")
    i.add_argument("--trunc", type=_nonneg_int, default=3)
    i.add_argument("--h", type=_positive(float), default=1e-4)
    i.add_argument("--samples", type=_nonneg_int, default=10)
    i.add_argument("--tol", type=_positive(float), default=1e-6)

    m = sub.add_parser("solve-moment", help="Solve the real moment equation on an orbit.")
    m.add_argument("problem")
    m.add_argument("--tol", type=_positive(float), default=1e-10)
    m.add_argument("--max-iter", type=_nonneg_int, default=200)

    q = sub.add_parser("periodic", help="Regularised periodic potential at points.")
    q.add_argument("families")
    q.add_argument("points")
    q.add_argument("--trunc", type=_nonneg_int, default=1000)
    q.add_argument("--unit", action="store_true", help="Drop the 1/(2d) factor per family.")

    x = sub.add_parser("export-builtin", help="Write a built-in configuration.")
    x.add_argument("name", choices=["goto"])
    x.add_argument("--n", type=int, default=2)
    x.add_argument("--K", type=int, default=8)
    x.add_argument("--out", help="Output path (stdout when omitted).")
    return p


# ---------------------------------------------------------------------------
# commands; each returns (exit status, report body, summary line)


def cmd_validate(args):
    cfg = io.load_config(args.config).certified()
    cert = cfg.certificate
    body = {"convergence": cert.as_dict(args.window if cert.passed else None)}
    if not cert.passed:
        return EXIT_FAIL, dict(body, status="FAIL"), f"FAIL: {cert.reason}"
    rep = config.check_smoothness(cfg, args.window, tol=args.tol, exhaustive=args.exhaustive)
    status = "PASS" if rep.passed else "FAIL"
    body.update(status=status, smoothness=rep.as_dict(),
                generators=[list(g) for g in cfg.generators])
    summary = f"{status}: {rep.flats_checked} flats, window {args.window}"
    if not rep.passed:
        w = rep.violations[0]
        summary += f"; condition ({w.condition}) fails on flats {list(w.flats)}"
        if w.determinant is not None:
            summary += f" with det = {w.determinant}"
    return (EXIT_OK if rep.passed else EXIT_FAIL), body, summary


def cmd_topology(args):
    cfg = io.load_config(args.config)
    planes = arrangement.build_arrangement(cfg, args.window)
    rep = arrangement.homotopy_report(planes, args.box, poset=not args.no_poset)
    chambers = arrangement.enumerate_chambers(planes, args.box)
    body = {"planes": [{"normal": list(h.normal), "level": h.level, "flat": h.flat_index} for h in planes],
            "chambers": [c.as_dict(planes) for c in chambers],
            "homotopy": rep.as_dict()}
    if args.plot_data:
        data = arrangement.plot_data(planes, args.box, rep)
        Path(args.plot_data).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return EXIT_OK, body, f"{len(chambers)} chambers, {len(rep.polytopes)} bounded polytopes"


def cmd_eval(args):
    cfg = io.load_config(args.config).certified()
    if not cfg.certificate.passed:
        raise NoCertifiedTail(f"no certified tail: {cfg.certificate.reason}")
    pts = io.load_points(args.points, cfg.rank)
    rows = []
    for k, pt in enumerate(pts):
        res = metric.potential(pt, cfg, args.trunc, max_truncation=args.max_trunc)
        row = {"point": k, "phi": res.phi, "truncation": res.truncation,
               "tail_bound": res.tail_bound, "exact": res.exact,
               "min_eigenvalue": res.min_eigenvalue()}
        if args.gram:
            g = metric.gram_matrix(pt, cfg, args.trunc)
            row["gram"] = g
            row["gram_min_eigenvalue"] = float(np.linalg.eigvalsh(g)[0])
        rows.append(row)
    if args.csv:
        n = cfg.rank
        with open(args.csv, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["point"] + [f"phi_{i + 1}{j + 1}" for i in range(n) for j in range(n)]
                        + ["truncation", "tail_bound", "min_eigenvalue"])
            for r in rows:
                wr.writerow([r["point"]] + [repr(float(x)) for x in np.ravel(r["phi"])]
                            + [r["truncation"], repr(r["tail_bound"]), repr(r["min_eigenvalue"])])
    return EXIT_OK, {"results": rows}, f"evaluated {len(rows)} points"


def _random_points(cfg, count, seed, trunc, attempts=10000):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(attempts):
        if len(out) == count:
            break
        pt = config.BasePoint.make(rng.uniform(-2, 2, cfg.rank),
                                   rng.uniform(-3, 3, cfg.rank) + 1j * rng.uniform(-3, 3, cfg.rank))
        if metric.admissible(pt, cfg, trunc):
            out.append(pt)
    if len(out) < count:
        raise DomainError(f"found only {len(out)} admissible random points")
    return out


def cmd_identities(args):
    cfg = io.load_config(args.config).certified()
    pts = (io.load_points(args.points, cfg.rank) if args.points
           else _random_points(cfg, args.samples, args.seed, args.trunc))
    rows = []
    worst = 0.0
    for k, pt in enumerate(pts):
        ph = metric.polyharmonic_check(pt, cfg, args.trunc, args.h)
        mono = metric.monopole_check(pt, cfg, args.trunc, args.h)
        rows.append({"point": k, "a": [float(x) for x in pt.a], "b": list(pt.b),
                     "polyharmonic_residual": ph.residual, "monopole_residual": mono})
        worst = max(worst, ph.residual, mono)
    status = "PASS" if worst < args.tol else "FAIL"
    body = {"status": status, "max_residual": worst, "results": rows}
    return (EXIT_OK if status == "PASS" else EXIT_FAIL), body, f"{status}: max residual {worst:.3e}"


def cmd_solve_moment(args):
    prob = io.load_moment_problem(args.problem)
    sol = moment.moment_solve(prob, tol=args.tol, max_iter=args.max_iter)
    body = {"coefficients": sol.coefficients, "y": sol.y, "residual": sol.residual,
            "iterations": sol.iterations}
    return EXIT_OK, body, f"converged in {sol.iterations} iterations, residual {sol.residual:.3e}"


def cmd_periodic(args):
    rank, fams = io.load_periodic(args.families)
    pts = io.load_points(args.points, rank)
    rows = []
    for k, pt in enumerate(pts):
        res = periodic.periodic_potential(pt, fams, args.trunc, unit=args.unit)
        shifts = []
        for fam in fams:
            a = tuple(float(x) + u for x, u in zip(pt.a, fam.generator))
            moved = periodic.periodic_potential(config.BasePoint(a, pt.b_re, pt.b_im), fams,
                                                args.trunc, unit=args.unit)
            shifts.append(float(np.max(np.abs(moved.phi - res.phi))))
        rows.append({"point": k, "phi": res.phi, "tail_bound": res.tail_bound,
                     "periodicity_residuals": shifts,
                     "fibration": periodic.fibration_report(pt.b, fams)})
    return EXIT_OK, {"results": rows}, f"evaluated {len(rows)} points"


def cmd_export(args):
    cfg = config.builtin_goto(args.n, args.K)
    text = io.dump_config(cfg)
    if args.out:
        Path(args.out).write_text(text)
        return EXIT_OK, {"written": args.out}, f"wrote {args.out}"
    return EXIT_OK, None, text


COMMANDS = {
    "validate": cmd_validate, "topology": cmd_topology, "eval": cmd_eval,
    "identities": cmd_identities, "solve-moment": cmd_solve_moment,
    "periodic": cmd_periodic, "export-builtin": cmd_export,
}


def _manifest(args) -> io.RunManifest:
    d = vars(args)
    inputs = {k: d[k] for k in ("config", "points", "problem", "families") if d.get(k)}
    skip = set(inputs) | {"command", "seed"}
    params = {k: v for k, v in d.items() if k not in skip}
    if "box" in params and not isinstance(params["box"], (int, float)):
        params["box"] = [list(p) for p in params["box"]] if isinstance(params["box"], list) else params["box"]
    return io.RunManifest(args.command, inputs, params, args.seed)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        manifest = _manifest(args)
        status, body, summary = COMMANDS[args.command](args)
    except HypertoricError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if body is None:
        sys.stdout.write(summary)
        return status
    sys.stdout.write(io.render_report(manifest, body))
    print(summary, file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
