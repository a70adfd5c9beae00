"""Command-line front end.

Subcommands: coords, omega, eigen, harmonic, surface, solve, verify.  Results
go to stdout (or --out); errors go to stderr as one JSON object.  Exit codes:
0 success, 2 usage or invalid input, 3 numerical failure.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .config import Config
from .errors import CyclideError, NumericalError, ParameterError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# formatting

def format_number(x):
    """17 significant digits; integers stay integers; non-finite values become null."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return "%.17g" % x


def dumps(obj):
    """Deterministic JSON: insertion-ordered keys and fixed float formatting."""
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (bool, np.bool_, int, float, np.integer, np.floating)):
        return format_number(obj)
    if isinstance(obj, dict):
        return "{" + ",".join(json.dumps(str(k)) + ":" + dumps(v) for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def emit_table(rows, format="csv", header=None):
    """CSV with a header line, or a JSON array of objects.

    ``rows`` are dicts (header from the first row unless given) or sequences
    (header required).  Rows are emitted in the order given.
    """
    rows = list(rows)
    if header is None:
        if rows and isinstance(rows[0], dict):
            header = list(rows[0])
        elif rows:
            raise ParameterError("sequence rows need an explicit header")
        else:
            header = []
    table = []
    for r in rows:
        vals = [r[h] for h in header] if isinstance(r, dict) else list(r)
        if len(vals) != len(header):
            raise ParameterError("rows must be rectangular")
        table.append(vals)
    if format == "json":
        return dumps([dict(zip(header, vals)) for vals in table]) + "\n"
    if format != "csv":
        raise ParameterError(f"unknown table format {format!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for vals in table:
        w.writerow([v if isinstance(v, str) else format_number(v) for v in vals])
    return buf.getvalue()


def parse_table(text):
    """Inverse of the CSV form of :func:`emit_table` (numbers parsed as floats)."""
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        return [], []
    header, out = rows[0], []
    for r in rows[1:]:
        vals = []
        for v in r:
            try:
                vals.append(float(v))
            except ValueError:
                vals.append(v)
        out.append(dict(zip(header, vals)))
    return header, out


# ---------------------------------------------------------------------------
# argument helpers

def _floats(text, count=None, name="value"):
    try:
        vals = [float(v) for v in str(text).split(",")]
    except ValueError:
        raise UsageError(f"{name} must be comma-separated numbers, got {text!r}") from None
    if count is not None and len(vals) != count:
        raise UsageError(f"{name} needs {count} numbers, got {len(vals)}")
    return vals


def _ints(text, count=None, name="value"):
    vals = _floats(text, count, name)
    if any(v != int(v) for v in vals):
        raise UsageError(f"{name} must be integers, got {text!r}")
    return [int(v) for v in vals]


def _read_points(path, columns=("x", "y", "z")):
    """Points from a CSV file with a header naming the columns (other columns ignored)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in columns if c not in (reader.fieldnames or [])]
        if missing:
            raise UsageError(f"{path}: missing column(s) {', '.join(missing)}")
        rows = [[float(r[c]) for c in columns] for r in reader]
    return np.array(rows, dtype=float).reshape(-1, len(columns))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--a", help="focal parameters a0,a1,a2,a3")
    p.add_argument("--omega-tol", type=float)
    p.add_argument("--ode-rtol", type=float)
    p.add_argument("--ode-atol", type=float)
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out", help="write the result here instead of stdout")


def build_parser():
    parser = _Parser(prog="cyclidic", description="Laplace's equation in five-cyclide coordinates")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("coords", help="coordinate conversions")
    p.add_argument("direction", choices=("to", "from"))
    p.add_argument("--point", help="x,y,z (to)")
    p.add_argument("--s", help="s1,s2,s3 (from)")
    p.add_argument("--sheet", help="sign word e0e1e2e3, e.g. 0101 (from; default 0000)")
    p.add_argument("--points", help="CSV with x,y,z (to) or s1,s2,s3[,sheet] (from)")
    p.add_argument("--scale", action="store_true", help="also report scale factors (to)")
    _common(p)

    p = sub.add_parser("omega", help="the elliptic substitution t = Omega(s) and its inverse")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--at", help="s value(s), comma-separated")
    g.add_argument("--phi", help="t value(s), comma-separated")
    g.add_argument("--breakpoints", action="store_true")
    p.add_argument("--direct", action="store_true", help="evaluate Omega by quadrature instead of the table")
    _common(p)

    p = sub.add_parser("eigen", help="two-parameter eigenpairs")
    p.add_argument("--kind", required=True)
    p.add_argument("--n", help="n_a,n_b")
    p.add_argument("--parity", required=True)
    p.add_argument("--tol", type=float)
    p.add_argument("--batch", help="NA,NB: table over 0..NA x 0..NB")
    p.add_argument("--jobs", type=int, default=1)
    _common(p)

    p = sub.add_parser("harmonic", help="evaluate harmonics")
    p.add_argument("action", choices=("eval",))
    p.add_argument("--kind", required=True)
    p.add_argument("--n", required=True)
    p.add_argument("--parity", required=True)
    p.add_argument("--points", help="CSV with x,y,z")
    p.add_argument("--point", help="x,y,z")
    _common(p)

    p = sub.add_parser("surface", help="mesh a coordinate surface s_i = d")
    p.add_argument("--index", type=int, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--resolution", default="24,24")
    p.add_argument("--triangles", action="store_true", help="indexed-triangle text instead of CSV")
    _common(p)

    p = sub.add_parser("solve", help="Dirichlet problem by separation of variables")
    p.add_argument("--region", required=True, choices=("first", "second", "third"))
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--boundary", default="builtin:point-source",
                   help="builtin:point-source (with --at) or grid:FILE")
    p.add_argument("--at", default="5,5,5", help="point-source location x,y,z")
    p.add_argument("--N", type=int, default=6)
    p.add_argument("--quad", type=int, help="Gauss points per boundary direction")
    p.add_argument("--check", action="store_true")
    p.add_argument("--field-points", help="CSV of x,y,z where the solution is sampled")
    p.add_argument("--field-out", help="CSV file for the sampled solution")
    _common(p)

    p = sub.add_parser("verify", help="built-in checks")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--laplacian", action="store_true")
    g.add_argument("--roundtrip", action="store_true")
    g.add_argument("--gram", action="store_true")
    p.add_argument("--kind", default="I")
    p.add_argument("--n", default="1,1")
    p.add_argument("--parity")
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--h", type=float, default=1e-2)
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    return parser


def make_config(args):
    cfg = Config.from_json(args.config) if args.config else Config()
    a = _floats(args.a, 4, "--a") if args.a else None
    return cfg.updated(a=a, omega_tol=args.omega_tol, ode_rtol=args.ode_rtol, ode_atol=args.ode_atol,
                       format=args.format).activate()


# ---------------------------------------------------------------------------
# subcommands

def cmd_coords(args, cfg):
    from .geometry import SignProfile, cyclide_gaps, from_cyclide, scale_factors

    if args.direction == "to":
        if args.points:
            p = _read_points(args.points)
        elif args.point:
            p = np.array([_floats(args.point, 3, "--point")])
        else:
            raise UsageError("coords to needs --point or --points")
        s = cyclide_gaps(p, cfg.a)[0]
        h = scale_factors(p, cfg.a) if args.scale else None
        if args.point:
            out = {"s": list(s[0])}
            if h is not None:
                out["h"] = list(h[0])
            return dumps(out) + "\n"
        rows = []
        for k in range(len(p)):
            row = {"x": p[k, 0], "y": p[k, 1], "z": p[k, 2], "s1": s[k, 0], "s2": s[k, 1], "s3": s[k, 2]}
            if h is not None:
                row.update(h1=h[k, 0], h2=h[k, 1], h3=h[k, 2])
            rows.append(row)
        return emit_table(rows, cfg.format if args.format else "csv")

    def word(text):
        text = text or "0000"
        if len(text) != 4 or any(ch not in "01" for ch in text):
            raise UsageError(f"sheet must be four bits e0e1e2e3, got {text!r}")
        return SignProfile.from_word(tuple(int(ch) for ch in text))

    if args.s:
        x = from_cyclide(_floats(args.s, 3, "--s"), word(args.sheet), cfg.a)
        return dumps({"point": list(x)}) + "\n"
    if not args.points:
        raise UsageError("coords from needs --s or --points")
    with open(args.points, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for r in reader:
            c = [float(r["s1"]), float(r["s2"]), float(r["s3"])]
            prof = word(r.get("sheet") or args.sheet)
            x = from_cyclide(c, prof, cfg.a)
            rows.append({"s1": c[0], "s2": c[1], "s3": c[2], "sheet": prof.sheet_id,
                         "x": x[0], "y": x[1], "z": x[2]})
    return emit_table(rows, cfg.format if args.format else "csv")


def cmd_omega(args, cfg):
    from .elliptic import get_table, omega_integral

    table = get_table(cfg.a, cfg.omega_tol)
    if args.breakpoints:
        return dumps({"b": list(table.b)}) + "\n"
    if args.at is not None:
        s = np.array(_floats(args.at, name="--at"))
        vals = [omega_integral(v, cfg.a, cfg.omega_tol) for v in s] if args.direct else table.omega(s)
        key = "Omega"
    else:
        vals = table.phi(np.array(_floats(args.phi, name="--phi")))
        key = "phi"
    vals = [float(v) for v in np.atleast_1d(vals)]
    return dumps({key: vals[0] if len(vals) == 1 else vals}) + "\n"


def _eigen_record(kind, n, parity, cfg, tol):
    from .eigensolver import solve_two_param, verify_pruefer
    from .elliptic import get_table

    table = get_table(cfg.a, cfg.omega_tol)
    e = solve_two_param(kind, n, parity, cfg.a, table, tol=tol)
    check = verify_pruefer(e)
    return {
        "kind": e.kind.name,
        "n": list(e.n),
        "parity": str(e.parity),
        "lambda1": e.lambda1,
        "lambda2": e.lambda2,
        "zero_counts": check["zero_counts"],
        "norm_check": e.diagnostics["norm_check"],
        "residuals": check["residuals"],
    }


def _eigen_job(job):
    kind, n, parity, cfg_dict, tol = job
    cfg = Config.from_dict(cfg_dict).activate()
    return _eigen_record(kind, n, parity, cfg, tol)


def cmd_eigen(args, cfg):
    from .eigensolver import ParityVector, ProblemKind

    pk = ProblemKind.of(args.kind)
    parity = str(ParityVector.parse(args.parity, pk))
    tol = args.tol if args.tol is not None else cfg.eigen_tol
    if args.batch:
        na, nb = _ints(args.batch, 2, "--batch")
        jobs = [(pk.name, (i, j), parity, cfg.to_dict(), tol) for i in range(na + 1) for j in range(nb + 1)]
        if args.jobs > 1:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                recs = list(pool.map(_eigen_job, jobs))
        else:
            recs = [_eigen_record(k, n, p, cfg, t) for k, n, p, _, t in jobs]
        recs.sort(key=lambda r: tuple(r["n"]))
        rows = [{"kind": r["kind"], "n_a": r["n"][0], "n_b": r["n"][1], "parity": r["parity"],
                 "lambda1": r["lambda1"], "lambda2": r["lambda2"]} for r in recs]
        return emit_table(rows, args.format or "csv")
    if not args.n:
        raise UsageError("eigen needs --n or --batch")
    return dumps(_eigen_record(pk.name, tuple(_ints(args.n, 2, "--n")), parity, cfg, tol)) + "\n"


def cmd_harmonic(args, cfg):
    from .eigensolver import ParityVector, ProblemKind, solve_two_param
    from .elliptic import get_table
    from .harmonics import CyclidicHarmonic, eval_G

    pk = ProblemKind.of(args.kind)
    if args.points:
        p = _read_points(args.points)
    elif args.point:
        p = np.array([_floats(args.point, 3, "--point")])
    else:
        raise UsageError("harmonic eval needs --point or --points")
    triple = solve_two_param(pk, _ints(args.n, 2, "--n"), ParityVector.parse(args.parity, pk), cfg.a,
                             get_table(cfg.a, cfg.omega_tol), tol=cfg.eigen_tol)
    g, flags = eval_G(CyclidicHarmonic(triple), p, return_flags=True)
    rows = [{"x": q[0], "y": q[1], "z": q[2], "G": v, "flag": int(f)} for q, v, f in zip(p, g, flags)]
    return emit_table(rows, args.format or "csv")


def cmd_surface(args, cfg):
    from .geometry import mesh_to_csv, mesh_to_triangles, surface_mesh

    res = tuple(_ints(args.resolution, 2, "--resolution"))
    mesh = surface_mesh(args.index, args.d, res, cfg.a)
    return mesh_to_triangles(mesh) if args.triangles else mesh_to_csv(mesh)


def _boundary(args, cfg, region):
    from .dirichlet import BoundaryFunction
    from .elliptic import get_table

    spec = args.boundary
    if spec == "builtin:point-source":
        return BoundaryFunction.point_source(_floats(args.at, 3, "--at")), True
    if spec.startswith("grid:"):
        with open(spec[5:]) as fh:
            data = json.load(fh)
        try:
            ta, tb, values = data["ta"], data["tb"], data["values"]
        except KeyError as exc:
            raise UsageError(f"grid file needs keys ta, tb, values; missing {exc}") from None
        return BoundaryFunction.from_grid(region, np.asarray(ta, float), np.asarray(tb, float), values,
                                          cfg.a, get_table(cfg.a, cfg.omega_tol)), False
    raise UsageError(f"unknown boundary {spec!r}")


def cmd_solve(args, cfg):
    from .dirichlet import boundary_l2_error, interior_points, solve_dirichlet
    from .elliptic import get_table
    from .geometry import RegionSpec

    region = RegionSpec(args.region, args.d).validate(cfg.a)
    e, analytic = _boundary(args, cfg, region)
    m = args.quad or cfg.quad_order or None
    sol = solve_dirichlet(region, e, args.N, cfg.a, get_table(cfg.a, cfg.omega_tol), m=m)
    out = sol.to_dict()
    if args.check:
        av = cfg.a.array
        i = region.index
        lo, hi = (region.d, av[i]) if region.kind == "first" else (av[i - 1], region.d)
        levels = np.linspace(lo, hi, 7)[1:-1]
        # ordered from far to near the boundary
        levels = levels[::-1] if region.kind == "first" else levels
        out["check"] = {"levels": [{"s": float(v), "error": boundary_l2_error(sol, e, v)} for v in levels]}
        if analytic:
            p = interior_points(region, 200, 0.1, cfg.a)
            out["check"]["interior_max_error"] = float(np.max(np.abs(sol(p) - e.e(p))))
    if args.field_points:
        p = _read_points(args.field_points)
        vals = sol(p)
        text = emit_table([{"x": q[0], "y": q[1], "z": q[2], "u": v} for q, v in zip(p, vals)], "csv")
        if args.field_out:
            with open(args.field_out, "w") as fh:
                fh.write(text)
        else:
            out["field"] = [{"point": list(q), "u": float(v)} for q, v in zip(p, vals)]
    return dumps(out) + "\n"


def cmd_verify(args, cfg):
    if args.roundtrip:
        from .geometry import all_sign_profiles, from_cyclide, to_cyclide

        rng = np.random.default_rng(args.seed)
        av = cfg.a.array
        u = rng.uniform(0.01, 0.99, size=(args.count, 3))
        s = av[:-1] + u * np.diff(av)
        worst = 0.0
        for prof in all_sign_profiles():
            back = to_cyclide(from_cyclide(s, prof, cfg.a), cfg.a)
            worst = max(worst, float(np.max(np.abs(back - s))))
        return dumps({"check": "roundtrip", "count": args.count, "max_error": worst}) + "\n"

    from .eigensolver import ParityVector, ProblemKind, gram_matrix, solve_two_param
    from .elliptic import get_table

    pk = ProblemKind.of(args.kind)
    parity = ParityVector.parse(args.parity or "0" * pk.parity_length, pk)
    table = get_table(cfg.a, cfg.omega_tol)
    if args.gram:
        g = gram_matrix(pk, parity, args.N, cfg.a, table)
        dev = np.abs(g - np.eye(len(g)))
        return dumps({"check": "gram", "kind": pk.name, "parity": str(parity), "N": args.N,
                      "max_offdiagonal": float(np.max(dev - np.diag(np.diag(dev)))),
                      "max_diagonal_deviation": float(np.max(np.diag(dev)))}) + "\n"

    from .harmonics import CyclidicHarmonic, laplacian_convergence, sample_points

    triple = solve_two_param(pk, _ints(args.n, 2, "--n"), parity, cfg.a, table, tol=cfg.eigen_tol)
    h = CyclidicHarmonic(triple)
    p = sample_points(pk, args.count, args.seed, cfg.a)
    rep = laplacian_convergence(h, p, args.h)
    return dumps({"check": "laplacian", "kind": pk.name, "n": list(triple.n), "parity": str(parity),
                  "count": args.count, **rep}) + "\n"


COMMANDS = {
    "coords": cmd_coords,
    "omega": cmd_omega,
    "eigen": cmd_eigen,
    "harmonic": cmd_harmonic,
    "surface": cmd_surface,
    "solve": cmd_solve,
    "verify": cmd_verify,
}


def _fail(code, payload):
    sys.stderr.write(dumps(payload) + "\n")
    return code


def dispatch(argv=None, stdout=None):
    """Run one command; returns the exit code."""
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        cfg = make_config(args)
        text = COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        return _fail(EXIT_USAGE, {"error": "usage", "message": str(exc)})
    except NumericalError as exc:
        return _fail(EXIT_NUMERICAL, exc.to_dict())
    except CyclideError as exc:
        return _fail(EXIT_USAGE, exc.to_dict())
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(EXIT_USAGE, {"error": "input", "message": str(exc)})
    except ArithmeticError as exc:
        return _fail(EXIT_NUMERICAL, {"error": "numerical", "message": str(exc)})
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main(argv=None):
    sys.exit(dispatch(argv))
