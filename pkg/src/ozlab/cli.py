"""Command-line entry point: ``ozlab <subcommand> ...``.

Exit codes: 0 success, 1 domain/data errors, 2 usage errors.  Every run
writes a JSON manifest last (``--manifest``, default ``<out>.manifest.json``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import re
import sys
import time

from ozlab import __version__
from ozlab.errors import OzlabError, UsageError

log = logging.getLogger("ozlab")

SUBCOMMANDS = ("saw-enumerate", "renewal-check", "oz-extrapolate", "skeleton", "wulff",
               "ising-mc", "oz-fit", "axioms")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def parse_vector(text: str, kind=float) -> tuple:
    try:
        return tuple(kind(c) for c in text.replace("(", "").replace(")", "").split(",") if c.strip())
    except ValueError as exc:
        raise UsageError(f"cannot parse vector {text!r}") from exc


def parse_targets(text: str, d: int) -> list[tuple[int, tuple[int, ...]]]:
    """``k*e1:20..200`` or ``k*1,1:1..10`` -> pairs ``(k, k v)``."""
    m = re.fullmatch(r"\s*k\s*\*\s*(e(\d+)|[-\d,() ]+)\s*:\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*", text)
    if not m:
        raise UsageError(f"cannot parse targets {text!r}; expected e.g. 'k*e1:20..200'")
    if m.group(2):
        i = int(m.group(2))
        if not 1 <= i <= d:
            raise UsageError(f"axis e{i} does not exist in d={d}")
        v = tuple(1 if j == i - 1 else 0 for j in range(d))
    else:
        v = parse_vector(m.group(1), int)
        if len(v) != d:
            raise UsageError(f"target direction {v} is not {d}-dimensional")
    a, b = int(m.group(3)), int(m.group(4))
    return [(k, tuple(k * c for c in v)) for k in range(a, b + 1)]


def parse_window(text: str) -> tuple[float, float]:
    try:
        a, b = text.split(":")
        return float(a), float(b)
    except ValueError as exc:
        raise UsageError(f"cannot parse window {text!r}; expected 'min:max'") from exc


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _write(path: str, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _default_direction(t) -> tuple[int, ...]:
    best = max(range(len(t)), key=lambda i: abs(t[i]))
    return tuple((1 if t[best] > 0 else -1) if j == best else 0 for j in range(len(t)))


# -- subcommands -------------------------------------------------------------

def cmd_saw_enumerate(args, man):
    from ozlab.saw import enumerate_two_point
    from ozlab.weights import saw_model

    table = enumerate_two_point(saw_model(args.beta, args.dim), args.max_len, cap=args.cap)
    _write(args.out, table.series.to_csv())
    man.add_output(args.out)


def _dc_and_table(args):
    from ozlab.renewal import direct_correlation
    from ozlab.saw import enumerate_two_point
    from ozlab.weights import saw_model

    model = saw_model(args.beta, args.dim)
    t = parse_vector(args.t) if args.t else (1.0,) + (0.0,) * (args.dim - 1)
    if len(t) != args.dim:
        raise UsageError(f"--t has {len(t)} components, expected {args.dim}")
    return model, t, direct_correlation(model, t, args.max_len, cap=args.cap)


def cmd_renewal_check(args, man):
    from ozlab.errors import DataError
    from ozlab.renewal import mass_gap_estimate, renewal_residual, tilted_step_mass
    from ozlab.saw import enumerate_two_point

    model, t, dc = _dc_and_table(args)
    table = enumerate_two_point(model, args.max_len, cap=args.cap)
    direction = parse_vector(args.direction, int) if args.direction else _default_direction(t)
    report = {"dim": args.dim, "beta": args.beta, "N": args.max_len, "t": list(t),
              "direction": list(direction), "residual": renewal_residual(table, dc),
              "tilted_mass_t": tilted_step_mass(dc, t),
              "tilted_mass_zero": tilted_step_mass(dc, (0.0,) * args.dim)}
    try:
        report["mass_gap"] = mass_gap_estimate(dc, table, direction).to_json()
    except DataError as exc:
        report["mass_gap"] = {"error": str(exc)}
    _write(args.out, _dump(report))
    man.add_output(args.out)


def cmd_oz_extrapolate(args, man):
    from ozlab.renewal import oz_extrapolate

    _model, t, dc = _dc_and_table(args)
    targets = parse_targets(args.targets, args.dim)
    logs = oz_extrapolate(dc, [x for _k, x in targets], log=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "g", "ratio_log"])
    for i, (k, x) in enumerate(targets):
        nxt = targets[i + 1][1] if i + 1 < len(targets) else None
        ratio = repr(logs[x] - logs[nxt]) if nxt is not None else ""
        w.writerow([k, repr(math.exp(logs[x])), ratio])
    _write(args.out, buf.getvalue())
    man.add_output(args.out)


def _read_path(path: str):
    from ozlab.lattice import LatticePath

    verts = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                verts.append(tuple(int(c) for c in row))
            except ValueError:
                if verts:
                    raise UsageError(f"non-integer vertex row {row} in {path}")
    if not verts:
        raise UsageError(f"path file {path} has no vertices")
    return LatticePath(verts)


def _load_body(args, man):
    from ozlab.weights import saw_model
    from ozlab.wulff import WulffBody, build_body

    if args.body:
        man.add_input(args.body)
        with open(args.body) as fh:
            return WulffBody.from_json(json.load(fh))
    if args.beta is None or args.dim is None:
        raise UsageError("give --body or --dim/--beta/--max-len to build one")
    return build_body(saw_model(args.beta, args.dim), args.max_len, args.resolution, cap=args.cap)


def cmd_skeleton(args, man):
    from ozlab.coarse import break_points, build_skeleton, surcharge
    from ozlab.lattice import DualVector

    man.add_input(args.path_file)
    path = _read_path(args.path_file)
    body = _load_body(args, man)
    if args.t:
        t = DualVector(parse_vector(args.t))
    else:
        best = max(range(len(body.duals)),
                   key=lambda i: sum(a * b for a, b in zip(body.directions[i], path.displacement())))
        t = DualVector(tuple(body.duals[best]))
    sk = build_skeleton(path, args.K, body)
    rep = surcharge(sk, t, body)
    out = {"K": args.K, "delta": args.delta, "t": list(t.components),
           "points": [list(p) for p in sk.points], "indices": list(sk.indices),
           "surcharge": rep.to_json(),
           "break_points": break_points(path, t, args.K, args.delta, body)}
    _write(args.out, _dump(out))
    man.add_output(args.out)


def cmd_wulff(args, man):
    from ozlab.weights import saw_model
    from ozlab.wulff import build_body, curvature

    body = build_body(saw_model(args.beta, args.dim), args.max_len, args.resolution, cap=args.cap)
    data = body.to_json()
    data["meta"] = dict(body.meta)
    if args.dim == 2 and args.resolution >= 32:
        cr = curvature(body)
        data["meta"].update({"kappa_min": cr.kappa_min, "kappa_min_err": cr.kappa_min_err,
                             "kappa_excludes_zero": cr.excludes_zero(), "spikes": cr.spikes})
        if args.curvature_out:
            _write(args.curvature_out, cr.to_csv())
    _write(args.out, _dump(data))
    man.add_output(args.out)
    if args.curvature_out and args.dim == 2 and args.resolution >= 32:
        man.add_output(args.curvature_out)


def cmd_ising_mc(args, man):
    from ozlab.config import model_from_config, validate_config
    from ozlab.ising.measure import correlations_to_csv, measure_correlation
    from ozlab.ising.wolff import spawn_seeds, wolff_sample

    man.add_input(args.config)
    with open(args.config) as fh:
        cfg = validate_config(fh.read())
    model, lattice = model_from_config(cfg)
    direction = parse_vector(args.direction, int) if args.direction else \
        (1,) + (0,) * (model.dim - 1)
    if len(direction) != model.dim:
        raise UsageError(f"--direction must have {model.dim} components")
    max_x = args.max_x if args.max_x is not None else max(1, min(lattice.extents) // 4)
    disp = [tuple(k * c for c in direction) for k in range(max_x + 1)]
    seeds = spawn_seeds(args.seed, args.chains)
    man.seeds = [args.seed] + seeds
    burn = cfg["burn_in"] if args.burn_in is None else args.burn_in
    streams = [wolff_sample(model, lattice, args.sweeps, s, burn_in=burn,
                            xi_target=cfg.get("xi_target")) for s in seeds]
    est = measure_correlation(streams, disp, symmetrize=not args.no_symmetrize,
                              estimator=args.estimator or cfg["estimator"], workers=args.threads)
    _write(args.out, correlations_to_csv(est))
    man.add_output(args.out)


def cmd_oz_fit(args, man):
    from ozlab.ising.fit import oz_fit
    from ozlab.ising.measure import correlations_from_csv

    man.add_input(args.input)
    with open(args.input) as fh:
        est = correlations_from_csv(fh.read())
    if not est:
        raise UsageError(f"{args.input} holds no estimates")
    d = len(est[0].x)
    direction = parse_vector(args.direction, int) if args.direction else (1,) + (0,) * (d - 1)
    window = parse_window(args.window) if args.window else None
    fit = oz_fit(est, direction, d, window)
    _write(args.out, fit.dumps() + "\n")
    man.add_output(args.out)


def cmd_axioms(args, man):
    from ozlab.weights import check_finite_energy, check_mixing, check_splitting, saw_model

    if args.model != "saw":
        raise UsageError(f"unknown model {args.model!r}; only 'saw' is available")
    model = saw_model(args.beta, args.dim)
    reports = [check_finite_energy(model, args.max_len, constant=args.beta),
               check_splitting(model, args.max_len, constant=1.0 + 1e-12),
               check_mixing(model, args.max_len, theta=args.theta)]
    text = json.dumps([r.to_json() for r in reports], sort_keys=True, indent=1) + "\n"
    if args.out:
        _write(args.out, text)
        man.add_output(args.out)
    else:
        sys.stdout.write(text)


# -- parser ------------------------------------------------------------------

def _saw_args(p, need_out=True):
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--cap", type=int, default=None, help="override the enumeration cap")
    if need_out:
        p.add_argument("--out", required=True)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=int, default=1,
                        help="cap on worker threads (independent MC chains)")
    common.add_argument("--manifest", default=None, help="manifest path (default <out>.manifest.json)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="ozlab", description="Path expansions, renewal structure and OZ decay.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("saw-enumerate", parents=[common], help="exact SAW two-point table as CSV")
    _saw_args(p)
    p.set_defaults(func=cmd_saw_enumerate)

    p = sub.add_parser("renewal-check", parents=[common], help="renewal residual and mass gap")
    _saw_args(p)
    p.add_argument("--t", default=None, help="dual direction, e.g. '1,0'")
    p.add_argument("--direction", default=None, help="lattice direction for the mass gap")
    p.set_defaults(func=cmd_renewal_check)

    p = sub.add_parser("oz-extrapolate", parents=[common], help="renewal extrapolation along a ray")
    _saw_args(p)
    p.add_argument("--t", default=None)
    p.add_argument("--targets", required=True, help="e.g. 'k*e1:20..200'")
    p.set_defaults(func=cmd_oz_extrapolate)

    p = sub.add_parser("skeleton", parents=[common], help="K-skeleton, surcharges and break points")
    p.add_argument("--path-file", required=True)
    p.add_argument("--K", type=float, default=3.0)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--t", default=None)
    p.add_argument("--body", default=None, help="body JSON from the wulff subcommand")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--max-len", type=int, default=12)
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_skeleton)

    p = sub.add_parser("wulff", parents=[common], help="boundary of the body of convergent tilts")
    _saw_args(p)
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--curvature-out", default=None)
    p.set_defaults(func=cmd_wulff)

    p = sub.add_parser("ising-mc", parents=[common], help="Wolff Monte Carlo correlations")
    p.add_argument("--config", required=True)
    p.add_argument("--sweeps", type=int, required=True)
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--direction", default=None)
    p.add_argument("--max-x", type=int, default=None)
    p.add_argument("--estimator", choices=["plain", "cluster"], default=None)
    p.add_argument("--no-symmetrize", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ising_mc)

    p = sub.add_parser("oz-fit", parents=[common], help="fit the OZ form to correlation data")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--direction", default=None)
    p.add_argument("--window", default=None, help="e.g. '8:32'")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_oz_fit)

    p = sub.add_parser("axioms", parents=[common], help="certify the weight axioms on short paths")
    p.add_argument("--model", default="saw")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_axioms)
    return parser


def main(argv=None) -> int:
    from ozlab.manifest import RunManifest

    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand; choose from " + ", ".join(SUBCOMMANDS))
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    params = {k: v for k, v in vars(args).items() if k != "func"}
    params["argv"] = argv
    man = RunManifest(args.command, params)
    t0 = time.perf_counter()
    code = 0
    try:
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        args.func(args, man)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = 2
    except OzlabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = 1
    man.wall_time = time.perf_counter() - t0
    man.exit_code = code
    out = getattr(args, "out", None)
    path = args.manifest or (f"{out}.manifest.json" if out else f"ozlab-{args.command}.manifest.json")
    man.write(path)
    return code


if __name__ == "__main__":
    sys.exit(main())
