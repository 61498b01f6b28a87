"""Command-line front end.

Documents are versioned JSON.  Every number is an exact rational string
``"p/q"``; Gaussian rationals are ``{"re": ..., "im": ...}`` objects and
directions are ``"x/y"`` strings.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass

from gmpy2 import mpq

from . import costokes, decomp
from .exactplane import (Direction, GaussianRational, Q, crossing_directions,
                         is_anti_stokes, is_stokes)
from .linalg import BlockStructure, LinAlgError, MatQ, get_block, peel_factors, similar
from .presentation import (Constr0Presentation, PresentationError, stalk,
                           total_monodromy, validate)
from .transport import DegeneratePath

FORMAT = "stokeslab"
VERSION = 1


class InputError(ValueError):
    kind = "InputError"


# serialization -------------------------------------------------------------

def rat(x) -> str:
    x = mpq(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rat(s) -> mpq:
    if not isinstance(s, str):
        raise InputError(f"expected a rational string, got {s!r}")
    try:
        return Q(s.strip())
    except (ValueError, ZeroDivisionError):
        raise InputError(f"not a rational: {s!r}") from None


def gauss(z: GaussianRational) -> dict:
    return {"re": rat(z.re), "im": rat(z.im)}


def parse_gauss(obj) -> GaussianRational:
    if not isinstance(obj, dict) or set(obj) != {"re", "im"}:
        raise InputError(f"expected {{re, im}}, got {obj!r}")
    return GaussianRational(parse_rat(obj["re"]), parse_rat(obj["im"]))


def parse_point(text: str) -> GaussianRational:
    """Command-line point: ``re`` or ``re,im`` with rational parts."""
    parts = text.split(",")
    if len(parts) > 2:
        raise InputError(f"bad point {text!r}; use re or re,im")
    re_ = parse_rat(parts[0])
    im = parse_rat(parts[1]) if len(parts) == 2 else mpq(0)
    return GaussianRational(re_, im)


def parse_direction(text) -> Direction:
    try:
        return Direction.parse(text)
    except (ValueError, AttributeError):
        raise InputError(f"bad direction {text!r}; use x/y with integers") from None


def matrix(m: MatQ) -> list:
    return [[rat(x) for x in row] for row in m.rows]


def parse_matrix(obj, shape) -> MatQ:
    r, c = shape
    if not isinstance(obj, list) or len(obj) != r or any(
            not isinstance(row, list) or len(row) != c for row in obj):
        raise InputError(f"expected a {r}x{c} matrix")
    return MatQ([[parse_rat(x) for x in row] for row in obj], c)


def presentation_payload(p: Constr0Presentation) -> dict:
    return {
        "exponents": [gauss(c) for c in p.exponents],
        "dims": list(p.dims),
        "maps": [[matrix(p.T(i, j)) for j in range(p.n)] for i in range(p.n)],
        "cut_direction": str(p.cut_direction),
        "base_direction": str(p.base_direction),
    }


def _dims(obj) -> tuple:
    if not isinstance(obj, list) or any(not isinstance(d, int) or isinstance(d, bool) or d < 1
                                        for d in obj):
        raise InputError("dims must be a list of positive integers")
    return tuple(obj)


def parse_presentation(obj) -> Constr0Presentation:
    _require_keys(obj, {"exponents", "dims", "maps", "cut_direction", "base_direction"})
    dims = _dims(obj["dims"])
    n = len(dims)
    exps = obj["exponents"]
    maps = obj["maps"]
    if not isinstance(exps, list) or len(exps) != n:
        raise InputError("one exponent per block is required")
    if not isinstance(maps, list) or len(maps) != n or any(
            not isinstance(row, list) or len(row) != n for row in maps):
        raise InputError("maps must be an n x n grid of matrices")
    return Constr0Presentation(
        tuple(parse_gauss(c) for c in exps), dims,
        tuple(tuple(parse_matrix(maps[i][j], (dims[i], dims[j])) for j in range(n))
              for i in range(n)),
        parse_direction(obj["cut_direction"]), parse_direction(obj["base_direction"]))


def stokes_payload(d: costokes.StokesData) -> dict:
    return {
        "direction": str(d.direction),
        "exponents": [gauss(c) for c in d.exponents],
        "dims": list(d.dims),
        "S": matrix(d.S),
        "Q": matrix(d.Q),
    }


def parse_stokes(obj) -> costokes.StokesData:
    _require_keys(obj, {"direction", "exponents", "dims", "S", "Q"})
    dims = _dims(obj["dims"])
    if not isinstance(obj["exponents"], list) or len(obj["exponents"]) != len(dims):
        raise InputError("one exponent per block is required")
    n = sum(dims)
    return costokes.StokesData(
        parse_direction(obj["direction"]), tuple(parse_gauss(c) for c in obj["exponents"]),
        dims, parse_matrix(obj["S"], (n, n)), parse_matrix(obj["Q"], (n, n)))


def _require_keys(obj, keys):
    if not isinstance(obj, dict):
        raise InputError("payload must be an object")
    missing = keys - set(obj)
    if missing:
        raise InputError(f"missing fields: {', '.join(sorted(missing))}")


def document(kind: str, payload: dict) -> dict:
    return {"format": FORMAT, "version": VERSION, "kind": kind, "payload": payload}


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"not JSON: {e}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise InputError("not a stokeslab document")
    if doc.get("version") != VERSION:
        raise InputError(f"unsupported document version {doc.get('version')!r}")
    if doc.get("kind") not in {"presentation", "stokes-data", "report", "error"}:
        raise InputError(f"unknown document kind {doc.get('kind')!r}")
    return doc


def parse_document(text: str):
    """Decode a document into a presentation, Stokes data or plain report."""
    doc = loads(text)
    if doc["kind"] == "presentation":
        return parse_presentation(doc["payload"])
    if doc["kind"] == "stokes-data":
        return parse_stokes(doc["payload"])
    return doc["payload"]


def serialize(obj) -> str:
    if isinstance(obj, Constr0Presentation):
        return dumps(document("presentation", presentation_payload(obj)))
    if isinstance(obj, costokes.StokesData):
        return dumps(document("stokes-data", stokes_payload(obj)))
    return dumps(document("report", obj))


# random instances ----------------------------------------------------------

class GeneratorError(RuntimeError):
    kind = "GeneratorError"


@dataclass(frozen=True)
class GeneratorSpec:
    seed: int
    n: int = 3
    maxdim: int = 2
    bound: int = 3

    def __post_init__(self):
        if not 1 <= self.n <= 6:
            raise InputError("n must be between 1 and 6")
        if not 1 <= self.maxdim <= 4:
            raise InputError("maxdim must be between 1 and 4")
        if self.bound < 1:
            raise InputError("bound must be positive")
        if (2 * self.bound + 1) ** 2 < self.n:
            raise InputError("grid too small for n distinct exponents")


MAX_ATTEMPTS = 1000
_SMALL_DIRECTIONS = sorted({Direction(x, y) for x in range(-5, 6) for y in range(-5, 6)
                            if (x, y) != (0, 0)}, key=lambda d: (d.x, d.y))


def _random_matrix(rng: random.Random, r: int, c: int, lo: int, hi: int) -> MatQ:
    return MatQ([[rng.randint(lo, hi) for _ in range(c)] for _ in range(r)], c)


def gen_random(spec: GeneratorSpec) -> Constr0Presentation:
    rng = random.Random(spec.seed)
    b = spec.bound
    attempts = 0

    def spend():
        nonlocal attempts
        attempts += 1
        if attempts > MAX_ATTEMPTS:
            raise GeneratorError(f"no valid instance after {MAX_ATTEMPTS} attempts")

    exps = []
    while len(exps) < spec.n:
        z = GaussianRational(rng.randint(-b, b), rng.randint(-b, b))
        if z in exps:
            spend()
            continue
        exps.append(z)
    dims = [rng.randint(1, spec.maxdim) for _ in range(spec.n)]
    maps = []
    for i in range(spec.n):
        row = []
        for j in range(spec.n):
            if i == j:
                while True:
                    m = _random_matrix(rng, dims[i], dims[i], -b, b)
                    if m.is_invertible():
                        break
                    spend()
            else:
                m = _random_matrix(rng, dims[i], dims[j], -2, 2)
            row.append(m)
        maps.append(tuple(row))
    while True:
        cut, base = rng.choice(_SMALL_DIRECTIONS), rng.choice(_SMALL_DIRECTIONS)
        p = Constr0Presentation(tuple(exps), tuple(dims), tuple(maps), cut, base)
        try:
            validate(p)
            return p
        except PresentationError:
            spend()


def generic_directions(p: Constr0Presentation, count: int, rng: random.Random | None = None) -> list:
    """Up to ``count`` small directions that are neither Stokes nor
    anti-Stokes; deterministic when no ``rng`` is given."""
    ok = [d for d in _SMALL_DIRECTIONS
          if not is_stokes(d, p.cfg) and not is_anti_stokes(d, p.cfg)]
    if rng is None:
        return ok[:count]
    return rng.sample(ok, min(count, len(ok)))


# checks shared by the subcommands and the self-test -----------------------

def roundtrip_report(p: Constr0Presentation, theta: Direction) -> dict:
    data = costokes.extract_stokes_data(p, theta)
    there = costokes.realize_presentation(data)
    rebased = decomp.rebase_presentation(p, theta)
    back = costokes.extract_stokes_data(there, theta)
    same_data = (back.exponents == data.exponents and back.dims == data.dims
                 and back.S == data.S and back.Q == data.Q)
    return {"theta": str(theta), "realize_extract": there == rebased,
            "extract_realize": same_data}


def cohomology_report(p: Constr0Presentation, xi: GaussianRational) -> dict:
    arcs = costokes.build_arc_subsheaf(p, xi)
    arcs.check()
    h = costokes.circle_cohomology(arcs)
    want = stalk(p, xi).dim
    return {"xi": gauss(xi), "h0": h.h0_dim, "h1": h.h1_dim, "stalk": want,
            "jumps": [str(d) for d in arcs.jumps],
            "arcs": [w.dim for w in arcs.arcs], "points": [w.dim for w in arcs.points],
            "ok": h.h0_dim == 0 and h.h1_dim == want}


def graded_report(p: Constr0Presentation, theta: Direction) -> bool:
    data = costokes.extract_stokes_data(p, theta)
    b = data.blocks
    for pos, c in enumerate(data.exponents):
        k = p.index_of(c)
        if not similar(get_block(data.Q, b, pos, pos), p.T(k, k)):
            return False
    return True


def e2_presentation() -> Constr0Presentation:
    """Two exponents 0 and 1 with T = [[2, 1], [5, 3]]."""
    return Constr0Presentation(
        (0, 1), (1, 1),
        ((MatQ([[2]]), MatQ([[1]])), (MatQ([[5]]), MatQ([[3]]))),
        Direction(0, -1), Direction(1, 1))


def e2_checks() -> dict:
    p = e2_presentation()
    theta = Direction(1, 1)
    t = total_monodromy(p)
    data = costokes.extract_stokes_data(p, theta)
    factors = peel_factors(t, BlockStructure((1, 1)))
    h = costokes.circle_cohomology(costokes.build_arc_subsheaf(p, 0))
    return {
        "T_inf": t == MatQ([[7, 1], [15, 3]]),
        "S": data.S == MatQ([[1, mpq(1, 3)], [0, 1]]),
        "Q": data.Q == MatQ([[2, 0], [15, 3]]),
        "T_2": factors[1] == MatQ([[1, 1], [0, 3]]),
        "T_1": factors[0] == MatQ([[2, 0], [5, 1]]),
        "H1_at_0": h.h1_dim == 1 and h.h0_dim == 0,
    }


def instance_checks(p: Constr0Presentation, rng: random.Random, ndirs: int = 4) -> dict:
    """Every module invariant on one instance; ``True`` means it held."""
    out = {}
    out["euler"] = (sum(p.N - stalk(p, c).dim for c in p.exponents) == p.N)
    pts = list(p.exponents)
    while len(pts) < p.n + 2:
        z = GaussianRational(mpq(rng.randint(-8, 8), 2), mpq(rng.randint(-8, 8), 2))
        if z not in pts:
            pts.append(z)
    reports = [cohomology_report(p, z) for z in pts]
    out["cohomology"] = all(r["ok"] for r in reports)
    dirs = generic_directions(p, ndirs, rng)
    out["two_halfplane"] = all(
        sum(costokes.two_halfplane_dims(p, z, th)) == r["h1"]
        for z, r in zip(pts, reports) for th in dirs
        if not ({th, -th} & set(crossing_directions(z, p.cfg))))
    out["graded"] = all(graded_report(p, th) for th in dirs)
    out["compare"] = all(decomp.compare_decompositions(p, th).agree for th in dirs)
    out["roundtrip"] = all(all(v for k, v in roundtrip_report(p, th).items() if k != "theta")
                           for th in dirs)
    out["trivial"] = decomp.trivial_stokes_check(p).ok
    th = dirs[0]
    top = max(c.dot(th) for c in p.exponents)
    far = th.vector().scale((top + 10) / (th.x ** 2 + th.y ** 2))
    out["stability"] = decomp.transport_stability(
        p, th, far, far + th.perp().vector().scale(3)).preserved
    return out


def selftest(instances: int, seed: int) -> dict:
    report = {"e2": e2_checks()}
    rng = random.Random(seed)
    failures = []
    for k in range(instances):
        spec = GeneratorSpec(seed=rng.getrandbits(63), n=rng.randint(1, 4),
                             maxdim=rng.randint(1, 3))
        p = gen_random(spec)
        checks = instance_checks(p, random.Random(spec.seed))
        bad = sorted(name for name, ok in checks.items() if not ok)
        if bad:
            failures.append({"seed": spec.seed, "n": spec.n, "maxdim": spec.maxdim, "failed": bad})
    report["instances"] = instances
    report["failures"] = failures
    report["passed"] = all(report["e2"].values()) and not failures
    return report


# dispatch ------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--quiet", action="store_true", help="print only the verdict")
    common.add_argument("--input", help="read the document from this file instead of stdin")
    parser = _Parser(prog="stokeslab", description="Stokes data of perverse-sheaf presentations.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check a presentation")
    sub.add_parser("monodromy", parents=[common], help="monodromy at infinity")
    c = sub.add_parser("cohomology", parents=[common], help="circle cohomology of L_<xi")
    c.add_argument("--xi", required=True, help="point re or re,im")
    c = sub.add_parser("laplace", parents=[common], help="presentation to Stokes data")
    c.add_argument("--theta", required=True)
    c = sub.add_parser("inverse-laplace", parents=[common], help="Stokes data to presentation")
    c.add_argument("--cut")
    c.add_argument("--base")
    c = sub.add_parser("decompose", parents=[common], help="Stokes and vanishing-cycle decompositions")
    c.add_argument("--theta", required=True)
    c = sub.add_parser("compare", parents=[common], help="compare the two decompositions")
    c.add_argument("--theta", required=True)
    c = sub.add_parser("roundtrip", parents=[common], help="check both round trips")
    c.add_argument("--theta", action="append", help="direction; repeatable (default: 8 generic ones)")
    c = sub.add_parser("generate", parents=[common], help="random valid presentation")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--n", type=int, default=3)
    c.add_argument("--maxdim", type=int, default=2)
    c.add_argument("--bound", type=int, default=3)
    c = sub.add_parser("selftest", parents=[common], help="run the invariant suite")
    c.add_argument("--instances", type=int, default=20)
    c.add_argument("--seed", type=int, default=0)
    return parser


def _read(args) -> str:
    if args.input:
        try:
            with open(args.input) as fh:
                return fh.read()
        except OSError as e:
            raise InputError(str(e)) from None
    return sys.stdin.read()


def _presentation(args) -> Constr0Presentation:
    obj = parse_document(_read(args))
    if not isinstance(obj, Constr0Presentation):
        raise InputError("expected a presentation document")
    validate(obj)
    return obj


def _subspaces(parts) -> list:
    return [[[rat(x) for x in b] for b in w.basis] for w in parts]


def _seed(args) -> int:
    env = os.environ.get("STOKESLAB_SEED")
    if env is None:
        return args.seed
    try:
        return int(env)
    except ValueError:
        raise InputError(f"STOKESLAB_SEED is not an integer: {env!r}") from None


def run(args) -> tuple[int, str, str]:
    """Execute a parsed command: (exit code, verdict, document text)."""
    cmd = args.command
    if cmd == "validate":
        p = _presentation(args)
        return 0, "valid", serialize({"verdict": "valid", "n": p.n, "N": p.N})
    if cmd == "monodromy":
        p = _presentation(args)
        t = total_monodromy(p)
        return 0, "ok", serialize({"verdict": "ok", "monodromy": matrix(t),
                                   "crossing_order": [k + 1 for k in p.crossing_order]})
    if cmd == "cohomology":
        p = _presentation(args)
        rep = cohomology_report(p, parse_point(args.xi))
        verdict = "pass" if rep.pop("ok") else "fail"
        rep["verdict"] = verdict
        return (0 if verdict == "pass" else 1), verdict, serialize(rep)
    if cmd == "laplace":
        p = _presentation(args)
        data = costokes.extract_stokes_data(p, parse_direction(args.theta))
        return 0, "ok", serialize(data)
    if cmd == "inverse-laplace":
        data = parse_document(_read(args))
        if not isinstance(data, costokes.StokesData):
            raise InputError("expected a stokes-data document")
        try:
            data.check()
        except ValueError as e:
            raise InputError(str(e)) from None
        cut = parse_direction(args.cut) if args.cut else None
        base = parse_direction(args.base) if args.base else None
        return 0, "ok", serialize(costokes.realize_presentation(data, cut, base))
    if cmd in ("decompose", "compare"):
        p = _presentation(args)
        res = decomp.compare_decompositions(p, parse_direction(args.theta))
        rep = {"theta": args.theta, "verdict": res.verdict,
               "mismatches": [k + 1 for k in res.mismatches]}
        if cmd == "decompose":
            rep["stokes"] = _subspaces(res.stokes.components)
            rep["vanishing_cycle"] = _subspaces(res.vanishing.components)
        return (0 if res.agree else 1), res.verdict, serialize(rep)
    if cmd == "roundtrip":
        p = _presentation(args)
        dirs = ([parse_direction(t) for t in args.theta] if args.theta
                else generic_directions(p, 8))
        rows = [roundtrip_report(p, th) for th in dirs]
        ok = all(r["realize_extract"] and r["extract_realize"] for r in rows)
        verdict = "pass" if ok else "fail"
        return (0 if ok else 1), verdict, serialize({"verdict": verdict, "directions": rows})
    if cmd == "generate":
        p = gen_random(GeneratorSpec(_seed(args), args.n, args.maxdim, args.bound))
        return 0, "ok", serialize(p)
    if cmd == "selftest":
        rep = selftest(args.instances, _seed(args))
        verdict = "pass" if rep["passed"] else "fail"
        rep["verdict"] = verdict
        return (0 if rep["passed"] else 1), verdict, serialize(rep)
    raise InputError(f"unknown command {cmd!r}")


INPUT_ERRORS = (InputError, PresentationError, costokes.BadDirection, decomp.PreconditionError,
                GeneratorError)
MATH_ERRORS = (costokes.SplitFailure, costokes.InvalidSubsheaf, LinAlgError, DegeneratePath,
               decomp.DecompositionError)


def _error(exc: Exception) -> str:
    kind = getattr(exc, "kind", type(exc).__name__)
    return serialize_error(kind, str(exc))


def serialize_error(kind: str, message: str) -> str:
    return dumps(document("error", {"error": kind, "message": message}))


def main(argv=None, stdout=None) -> int:
    out = stdout or sys.stdout
    argv = sys.argv[1:] if argv is None else list(argv)
    quiet = "--quiet" in argv
    try:
        args = build_parser().parse_args(argv)
        code, verdict, text = run(args)
    except INPUT_ERRORS as e:
        code, verdict, text = 2, "error", _error(e)
    except MATH_ERRORS as e:
        code, verdict, text = 1, "fail", _error(e)
    out.write(verdict + "\n" if quiet else text)
    return code


if __name__ == "__main__":
    sys.exit(main())
