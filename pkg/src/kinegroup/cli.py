"""Command-line front end: ``kinegroup <verb> [options]``.

Exit codes: 0 success, 1 verification failure, 2 usage or validation error.
Errors are written to stderr as ``{"error": code, "detail": message}``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Any, Sequence

import numpy as np

from . import __version__
from .acceptance import DEFAULT_SEED, run_all
from .classic import classify, galilei_boost, lorentz_boost
from .errors import KinegroupError
from .isotropy import ClosedPath, path_samples, round_trip_speed, sine_resync
from .reichenbach import (
    ShearK,
    TwoWayParams,
    decompose_two_way,
    ellipsoid_geometry,
    reichenbach_boost,
    shear_matrix,
    tangherlini,
    two_way_map,
    ver_residual,
)
from .spacetime import AffineMap4, axiom_predicates, compose, velocity_of
from .special import (
    E1,
    SpecialParams,
    add_velocity,
    bogoslovsky,
    coefficients,
    domain_interval,
    special_matrix,
)

SEED_ENV = "KINEGROUP_SEED"
FAMILIES = ("identity", "special", "lorentz", "galilei", "shear", "two-way", "tangherlini", "reichenbach-boost", "bogoslovsky")


class UsageError(Exception):
    """Bad command line or input file; exit code 2."""

    def __init__(self, code: str, detail: str):
        super().__init__(detail)
        self.code = code
        self.detail = detail


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError("usage", message)


# ------------------------------------------------------------------ output


def _plain(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return [_plain(x) for x in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(x) for x in obj]
    return obj


def _encode(obj: Any) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isnan(obj):
            return '"NaN"'
        if math.isinf(obj):
            return '"Infinity"' if obj > 0 else '"-Infinity"'
        return "%.17g" % (obj + 0.0)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, list):
        return "[" + ", ".join(_encode(x) for x in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """JSON with 17 significant digits and infinities as strings."""
    return _encode(_plain(obj))


def _csv_cell(x: Any) -> str:
    if isinstance(x, (float, np.floating)):
        return "%.12g" % (float(x) + 0.0)
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    return str(x)


def to_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_csv_cell(x) for x in row])
    return buf.getvalue()


class Result:
    """Payload of a verb: a JSON object and optionally a table for CSV output."""

    def __init__(self, data: dict, header: Sequence[str] | None = None, rows=None, ok: bool = True):
        self.data = data
        self.header = header
        self.rows = rows
        self.ok = ok

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            if self.header is None:
                flat = {k: v for k, v in _plain(self.data).items() if not isinstance(v, (dict, list))}
                return to_csv(list(flat), [list(flat.values())])
            return to_csv(self.header, self.rows)
        return dumps(self.data) + "\n"


# ------------------------------------------------------------------ argument types


def _vec3(text: str) -> np.ndarray:
    try:
        vals = [float(x) for x in text.replace(" ", "").split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}") from None
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    return np.array(vals)


def read_config(path: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, ``[section]`` lines are ignored."""
    out: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError("config", f"cannot read config {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise UsageError("config", f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        value = value.strip('"').strip("'")
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _load_json(path: str) -> Any:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError("input", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError("input", f"{path}: invalid JSON ({exc.msg})") from None


def load_map(path: str) -> AffineMap4:
    """Load ``{"linear", "translation"}``, or the output of ``build``/``compose``."""
    data = _load_json(path)
    if isinstance(data, dict) and "map" in data:
        data = data["map"]
    return AffineMap4.from_dict(data)


# ------------------------------------------------------------------ shared option groups


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", "-o", help="write the result to this file instead of stdout")
    p.add_argument("--tolerance", type=float, help="override the verification tolerance")
    p.add_argument("--seed", type=int, help=f"random seed (falls back to ${SEED_ENV})")
    p.add_argument("--config", help="key = value file supplying option defaults")


def _add_special(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("special family")
    g.add_argument("--case", choices=("galilean", "exp", "power", "bounded"))
    g.add_argument("--c0", type=float, help="limit speed of the bounded case (default 1)")
    g.add_argument("--c1", type=float, help="1/|l| in the power case")
    g.add_argument("--sign", type=float, help="sign of l when --c1 is given")
    g.add_argument("--eta", type=float)
    g.add_argument("--l", type=float)
    g.add_argument("--r1", type=float)
    g.add_argument("--r2", type=float)
    g.add_argument("--a1", type=float)
    g.add_argument("--lambda1", type=float)


def special_params(args) -> SpecialParams:
    if args.case is None:
        raise UsageError("usage", "--case is required")
    data: dict[str, Any] = {"case": args.case}
    for key in ("c0", "c1", "sign", "eta", "l", "r1", "r2", "a1", "lambda1"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    if args.case == "bounded" and "c0" not in data:
        data["c0"] = 1.0
    return SpecialParams.from_dict(data)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        raise UsageError("seed-required", f"this command samples randomly; pass --seed or set {SEED_ENV}")
    try:
        return int(env)
    except ValueError:
        raise UsageError("seed-required", f"{SEED_ENV} must be an integer, got {env!r}") from None


def _map_payload(F: AffineMap4) -> dict:
    rep = axiom_predicates(F)
    try:
        V = velocity_of(F)
    except KinegroupError:
        V = None
    return {
        "map": F.to_dict(),
        "velocity": V,
        "axioms": {"causal": rep.causal, "time_oriented": rep.time_oriented, "space_oriented": rep.space_oriented},
    }


def _map_table(F: AffineMap4) -> tuple[list[str], list[list]]:
    rows = [[i] + list(F.matrix[i]) + [F.translation[i]] for i in range(4)]
    return ["row", "x1", "x2", "x3", "t", "translation"], rows


# ------------------------------------------------------------------ verbs


def cmd_build(args) -> Result:
    fam = args.family
    c = args.c
    if fam == "identity":
        F = AffineMap4.identity()
    elif fam == "special":
        F = AffineMap4(special_matrix(special_params(args), args.direction, _need(args, "v")))
    elif fam == "lorentz":
        F = AffineMap4(lorentz_boost(_need(args, "velocity"), c))
    elif fam == "galilei":
        F = AffineMap4(galilei_boost(_need(args, "velocity")))
    elif fam == "shear":
        F = AffineMap4(shear_matrix(ShearK(_need(args, "k"), args.lam, c)))
    elif fam == "two-way":
        if args.params:
            P = TwoWayParams.from_dict(_load_json(args.params))
        else:
            zero = np.zeros(3)
            P = TwoWayParams(
                lam=args.lam,
                k1=zero if args.k1 is None else args.k1,
                k2=zero if args.k2 is None else args.k2,
                V=zero if args.velocity is None else args.velocity,
                c=c,
            )
        F = two_way_map(P)
    elif fam == "tangherlini":
        F = tangherlini(_need(args, "v"), args.lam, c)
    elif fam == "reichenbach-boost":
        F = AffineMap4(reichenbach_boost(ShearK(_need(args, "k"), 1.0, c), _need(args, "v")))
    else:
        F = bogoslovsky(_need(args, "s"), _need(args, "v"), args.c0 if args.c0 is not None else c)
    payload = {"family": fam}
    payload.update(_map_payload(F))
    header, rows = _map_table(F)
    return Result(payload, header, rows)


def _need(args, name: str):
    val = getattr(args, name)
    if val is None:
        raise UsageError("usage", f"--{name.replace('_', '-')} is required here")
    return val


def cmd_compose(args) -> Result:
    maps = [load_map(p) for p in args.maps]
    F = maps[-1]
    for G in reversed(maps[:-1]):
        F = compose(G, F)
    payload = _map_payload(F)
    header, rows = _map_table(F)
    return Result(payload, header, rows)


def cmd_classify(args) -> Result:
    P = special_params(args)
    rep = classify(P, numeric=args.numeric)
    data = rep.to_dict()
    data["params"] = P.to_dict()
    rows = [[v, r] for v, r in zip(rep.sample_velocities, rep.reflection_residuals)]
    return Result(data, ["v", "reflection_residual"], rows)


def cmd_addvel(args) -> Result:
    P = special_params(args)
    v1, v2 = _need(args, "v1"), _need(args, "v2")
    w = add_velocity(P, v1, v2)
    co = coefficients(P, w)
    data = {"v1": v1, "v2": v2, "result": w, "a": co.a, "lambda": co.lam}
    return Result(data, ["v1", "v2", "v1*v2", "a(v1*v2)", "lambda(v1*v2)"], [[v1, v2, w, co.a, co.lam]])


def _ellipsoid_rows(sh: ShearK, samples: int, seed: int):
    rng = np.random.default_rng(seed)
    geo = ellipsoid_geometry(sh)
    theta = np.arccos(rng.uniform(-1.0, 1.0, samples))
    phi = rng.uniform(0.0, 2.0 * np.pi, samples)
    pts = geo.boundary_points(theta, phi)
    res = np.atleast_1d(ver_residual(sh, pts))
    rows = [[t, p, *v, r] for t, p, v, r in zip(theta, phi, pts, res)]
    return geo, rows, float(np.max(np.abs(res))) if samples else 0.0


ELLIPSOID_HEADER = ["theta", "phi", "vx", "vy", "vz", "residual"]


def cmd_ellipsoid(args) -> Result:
    sh = ShearK(_need(args, "k"), 1.0, args.c)
    tol = args.tolerance if args.tolerance is not None else 1e-10
    if args.samples:
        geo, rows, worst = _ellipsoid_rows(sh, args.samples, _seed(args))
    else:
        geo, rows, worst = ellipsoid_geometry(sh), [], 0.0
    data = geo.to_dict()
    data.update(samples=args.samples or 0, max_residual=worst, tolerance=tol)
    header = ELLIPSOID_HEADER if args.samples else ["centre_x", "centre_y", "centre_z", "major", "transverse", "lower", "upper"]
    if not args.samples:
        rows = [[*geo.centre, geo.major, geo.transverse, geo.interval.lower, geo.interval.upper]]
    return Result(data, header, rows, ok=worst <= tol)


def _chart(name: str, c: float):
    if name == "identity":
        return AffineMap4.identity(), False
    if name == "sine":
        return sine_resync(c), True
    return load_map(name), False


def _path(name: str) -> ClosedPath:
    if name in ("unit-square", "triangle"):
        return ClosedPath.named(name)
    return ClosedPath.from_dict(_load_json(name))


def cmd_verify_two_way(args) -> Result:
    chart, nonlinear = _chart(args.map, args.c)
    source = load_map(args.source) if args.source else None
    path = _path(args.path)
    n = args.n if args.n is not None else (10_000 if nonlinear else 100)
    rt = round_trip_speed(chart, path, n, args.c, source)
    tol = args.tolerance if args.tolerance is not None else (1e-6 if nonlinear else 1e-8)
    dev = abs(rt - args.c)
    data = {"round_trip": rt, "c": args.c, "deviation": dev, "length": path.length, "n": n, "tolerance": tol,
            "passed": dev <= tol}
    if nonlinear:
        data["max_gradient"] = chart.max_gradient(path_samples(path, n)[0])
    return Result(data, ["round_trip", "c", "deviation", "length", "n", "passed"],
                  [[rt, args.c, dev, path.length, n, dev <= tol]], ok=dev <= tol)


def cmd_decompose(args) -> Result:
    F = load_map(args.map)
    tol = args.tolerance if args.tolerance is not None else 1e-8
    fit = decompose_two_way(F, args.c, tol=tol, fixed_k1=args.fixed_k1)
    data = fit.to_dict()
    return Result(data, ["member", "residual", "iterations", "reason"],
                  [[fit.member, fit.residual, fit.iterations, fit.reason]], ok=fit.member)


def cmd_selftest(args) -> Result:
    seed = args.seed if args.seed is not None else int(os.environ.get(SEED_ENV, DEFAULT_SEED))
    results = run_all(seed)
    if args.format == "json":
        for r in results:
            print(r.line(), file=sys.stderr)
    data = {"seed": seed, "passed": all(r.passed for r in results), "criteria": [r.to_dict() for r in results]}
    rows = [[r.number, r.name, r.passed, r.seconds, r.detail] for r in results]
    return Result(data, ["criterion", "name", "passed", "seconds", "detail"], rows, ok=data["passed"])


def _grid(lo: float, hi: float, n: int) -> np.ndarray:
    if n is None or n < 1:
        raise UsageError("empty-grid", "grid needs at least one point per axis")
    if not lo <= hi:
        raise UsageError("usage", "grid lower bound exceeds upper bound")
    return np.linspace(lo, hi, n) if n > 1 else np.array([lo])


def cmd_sweep(args) -> Result:
    if args.table == "addvel":
        P = special_params(args)
        vs = _grid(args.v_min, args.v_max, args.n)
        I = domain_interval(P)
        if not all(v in I for v in (vs[0], vs[-1])):
            raise UsageError("grid-domain", f"grid [{vs[0]}, {vs[-1]}] leaves ]{I.lower}, {I.upper}[")
        rows = []
        for v1 in vs:
            for v2 in vs:
                w = add_velocity(P, v1, v2)
                co = coefficients(P, w)
                rows.append([v1, v2, w, co.a, co.lam])
        header = ["v1", "v2", "v1*v2", "a(v1*v2)", "lambda(v1*v2)"]
        data = {"table": "addvel", "params": P.to_dict(), "columns": header, "rows": rows}
        return Result(data, header, rows)
    sh = ShearK(_need(args, "k"), 1.0, args.c)
    if args.samples is None or args.samples < 1:
        raise UsageError("empty-grid", "ellipsoid sweep needs --samples >= 1")
    tol = args.tolerance if args.tolerance is not None else 1e-10
    _, rows, worst = _ellipsoid_rows(sh, args.samples, _seed(args))
    data = {"table": "ellipsoid", "columns": ELLIPSOID_HEADER, "rows": rows, "max_residual": worst}
    return Result(data, ELLIPSOID_HEADER, rows, ok=worst <= tol)


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kinegroup", description="Kinematic transformation groups: build, compose, classify, verify.")
    parser.add_argument("--version", action="version", version=f"kinegroup {__version__}")
    sub = parser.add_subparsers(dest="verb", parser_class=_Parser)

    def verb(name: str, func, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help, description=help)
        _add_common(p)
        p.set_defaults(func=func)
        return p

    p = verb("build", cmd_build, "construct a transformation and print its matrix")
    p.add_argument("--family", choices=FAMILIES, required=True)
    _add_special(p)
    p.add_argument("--v", type=float, help="speed parameter")
    p.add_argument("--s", type=float, help="scaling exponent of the bogoslovsky family")
    p.add_argument("--direction", type=_vec3, default=E1, help="unit boost direction for --family special")
    p.add_argument("--velocity", type=_vec3)
    p.add_argument("--k", type=_vec3)
    p.add_argument("--k1", type=_vec3)
    p.add_argument("--k2", type=_vec3)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--params", help="two-way parameter JSON file")

    p = verb("compose", cmd_compose, "compose maps: 'compose A B' gives A o B")
    p.add_argument("maps", nargs="+", help="map JSON files ('-' for stdin)")

    p = verb("classify", cmd_classify, "decide GALILEO / LORENTZ / ANISOTROPIC for a special family")
    _add_special(p)
    p.add_argument("--numeric", action="store_true", help="treat |param| < 1e-12 as zero")

    p = verb("addvel", cmd_addvel, "compose two velocities with the family's addition law")
    _add_special(p)
    p.add_argument("--v1", type=float)
    p.add_argument("--v2", type=float)

    p = verb("ellipsoid", cmd_ellipsoid, "velocity ellipsoid of a synchrony shear")
    p.add_argument("--k", type=_vec3)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--samples", type=int, help="number of random boundary points (needs a seed)")

    p = verb("verify-two-way", cmd_verify_two_way, "measure the round-trip light speed around a closed path")
    p.add_argument("--map", default="identity", help="'identity', 'sine' or a map JSON file")
    p.add_argument("--source", help="map JSON from Minkowski coordinates to the chart the map acts on")
    p.add_argument("--path", default="unit-square", help="'unit-square', 'triangle' or a path JSON file")
    p.add_argument("--n", type=int, help="samples per edge")
    p.add_argument("--c", type=float, default=1.0)

    p = verb("decompose", cmd_decompose, "fit a map to the two-way family lambda K2 Lambda K1^-1")
    p.add_argument("--map", required=True)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--fixed-k1", type=_vec3, help="hold k1 fixed (0,0,0 for a Minkowski source)")

    p = verb("selftest", cmd_selftest, "run the acceptance checks; exit code is the verdict")

    p = verb("sweep", cmd_sweep, "tabulate an addition law or sample an ellipsoid")
    p.add_argument("--table", choices=("addvel", "ellipsoid"), required=True)
    _add_special(p)
    p.add_argument("--v-min", type=float, default=-0.9)
    p.add_argument("--v-max", type=float, default=0.9)
    p.add_argument("--n", type=int, default=11)
    p.add_argument("--k", type=_vec3)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--samples", type=int)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = read_config(known.config)
    choices = parser._subparsers._group_actions[0].choices  # noqa: SLF001
    verb = next((a for a in argv if a in choices), None)
    if verb is None:
        return
    sp = choices[verb]
    bad = set(cfg) - {a.dest for a in sp._actions}  # noqa: SLF001
    if bad:
        raise UsageError("config", f"unknown keys for {verb}: {', '.join(sorted(bad))}")
    flags = {a.dest for a in sp._actions if isinstance(a, argparse._StoreTrueAction)}  # noqa: SLF001
    for key in flags & set(cfg):
        if cfg[key].lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise UsageError("config", f"{key} must be true or false")
        cfg[key] = cfg[key].lower() in ("true", "1", "yes")
    # argparse runs type conversion on string defaults
    sp.set_defaults(**cfg)


def _fail(code: str, detail: str) -> int:
    print(dumps({"error": code, "detail": detail}), file=sys.stderr)
    return 2


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if args.verb is None:
            raise UsageError("usage", "a verb is required: " + ", ".join(sorted(parser._subparsers._group_actions[0].choices)))  # noqa: SLF001
        result = args.func(args)
    except UsageError as exc:
        return _fail(exc.code, exc.detail)
    except KinegroupError as exc:
        return _fail(exc.code, str(exc))
    text = result.render(args.format)
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            return _fail("output", f"cannot write {args.output}: {exc.strerror}")
    else:
        sys.stdout.write(text)
    return 0 if result.ok else 1


if __name__ == "__main__":
    sys.exit(main())
