"""``trikit`` command line.

Every subcommand prints one JSON report on stdout and progress on stderr.
Exit codes: 0 pass, 2 mathematical failure, 3 precision exhausted,
4 malformed input.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import algebra
from .errors import MalformedInput, MathFailure, PrecisionError
from .field import make_field
from .group import check_triple, membership_report, random_group_element, torus_element, triality_lift
from .io import dump_json, load_lattice, load_matrix, load_witness, parse_monomial, write_json
from .lattice import Lattice, check_all
from .linalg import JetMatrix, det
from .normalize import normalize_lattice
from .pipelines import cocycle_suite, negative_battery, roundtrip
from .series import DEFAULT_PREC

EXIT_PASS, EXIT_MATH, EXIT_PREC, EXIT_INPUT = 0, 2, 3, 4


class _Ctx:
    def __init__(self, args):
        self.args = args
        self.field = make_field(args.p)
        self.prec = args.prec
        self.seed = args.seed
        self.quiet = args.quiet
        self.t0 = time.perf_counter()

    def say(self, msg):
        if not self.quiet:
            print(f"[trikit {time.perf_counter() - self.t0:7.2f}s] {msg}", file=sys.stderr)

    def report(self, verdict: bool, **body):
        out = {"command": self.args.command, "field": self.field.to_json(), "precision": self.prec,
               "seed": self.seed, "verdict": "pass" if verdict else "fail"}
        out.update(body)
        return out


# ---------------------------------------------------------------------------
# subcommands; each returns (report, exit code)


def cmd_gram(ctx):
    G = algebra.derive_gram()
    d = det(JetMatrix.from_ints(ctx.field, G))
    body = {"gram": G, "anchor_e4_e5": G[3][4], "q_basis": [0] * 8, "det": d.to_json()}
    return ctx.report(True, **body), EXIT_PASS


def cmd_axioms(ctx):
    n = ctx.args.samples
    if n <= 0:
        ctx.say("warning: no samples requested; the pass is vacuous")
    ctx.say(f"checking {len(algebra.IDENTITY_NAMES)} identities on {max(n, 0)} samples")
    rep = algebra.validate_axioms(ctx.field, n, ctx.seed, ctx.prec)
    body = rep.to_json()
    if n <= 0:
        body["warning"] = "vacuous pass: zero samples"
    return ctx.report(rep.passed, **body), EXIT_PASS if rep.passed else EXIT_MATH


def _witness(ctx):
    return load_witness(ctx.args.witness, ctx.field) if ctx.args.witness else None


def cmd_check(ctx):
    L = load_lattice(ctx.args.lattice, ctx.field)
    ctx.field = L.field
    w = _witness(ctx)
    ctx.say("checking conditions (1)-(4)" + ("" if w else " with witness search"))
    rep = check_all(L, w, ctx.prec, ctx.args.search_limit)
    return ctx.report(rep.passed, **rep.to_json()), EXIT_PASS if rep.passed else EXIT_MATH


def cmd_normalize(ctx):
    L = load_lattice(ctx.args.lattice, ctx.field)
    ctx.field = L.field
    w = _witness(ctx)
    rep = check_all(L, w, ctx.prec, ctx.args.search_limit)
    if not rep.passed:
        ctx.say(f"lattice fails condition ({rep.failed})")
        return ctx.report(False, check=rep.to_json()), EXIT_MATH
    ctx.say("conditions hold; normalizing")
    g, trace = normalize_lattice(L, rep.witness if w is None else w, ctx.prec, report=rep)
    if ctx.args.output:
        write_json(ctx.args.output, {"field": ctx.field.to_json(), "matrix": g.to_json()})
        ctx.say(f"wrote {ctx.args.output}")
    return ctx.report(True, g=g.to_json(), trace=trace.to_json()), EXIT_PASS


def cmd_member(ctx):
    g = load_matrix(ctx.args.g, ctx.field)
    ctx.field = g.field
    rep = membership_report(g, ctx.prec)
    return ctx.report(rep["member"], membership=rep), EXIT_PASS if rep["member"] else EXIT_MATH


def cmd_torus(ctx):
    mu1 = parse_monomial(ctx.field, ctx.args.mu1)
    mu2 = parse_monomial(ctx.field, ctx.args.mu2)
    g = torus_element(ctx.field, mu1, mu2)
    if ctx.args.output:
        write_json(ctx.args.output, {"field": ctx.field.to_json(), "matrix": g.to_json()})
    return ctx.report(True, g=g.to_json(), mu1=mu1.to_json(), mu2=mu2.to_json()), EXIT_PASS


def cmd_random(ctx):
    g, word = random_group_element(ctx.field, ctx.seed, ctx.args.len, ctx.args.pole_bound, return_word=True)
    if ctx.args.output:
        write_json(ctx.args.output, {"field": ctx.field.to_json(), "matrix": g.to_json()})
    return ctx.report(True, word=word, g=g.to_json()), EXIT_PASS


def cmd_lattice(ctx):
    L = Lattice.standard(ctx.field, ctx.prec)
    if ctx.args.g:
        g = load_matrix(ctx.args.g, ctx.field)
        L = L.transform(g)
    if ctx.args.output:
        write_json(ctx.args.output, L.to_json())
    return ctx.report(True, lattice=L.to_json()), EXIT_PASS


def cmd_lift(ctx):
    g1 = load_matrix(ctx.args.g, ctx.field)
    ctx.field = g1.field
    res = triality_lift(g1, ctx.prec)
    both = [check_triple(g1, *res.pair(s), N=ctx.prec) for s in (1, -1)]
    ctx.say(f"lift found; triple check (+, -): {both}")
    if ctx.args.output:
        write_json(ctx.args.output, {"field": ctx.field.to_json(), "g2": res.g2.to_json(), "g3": res.g3.to_json()})
    ok = all(both)
    return ctx.report(ok, g2=res.g2.to_json(), g3=res.g3.to_json(), info=res.info,
                      triple_plus=both[0], triple_minus=both[1]), EXIT_PASS if ok else EXIT_MATH


def cmd_roundtrip(ctx):
    a = ctx.args

    def progress(i, rec):
        ctx.say(f"word {i}: {'ok' if rec['ok'] else 'FAILED'}")

    out, _ = roundtrip(ctx.field, a.words, a.len, a.pole_bound, ctx.seed, ctx.prec, a.searches, progress)
    ok = out["succeeded"] == out["words"]
    return ctx.report(ok, length=a.len, pole_bound=a.pole_bound, **out), EXIT_PASS if ok else EXIT_MATH


def cmd_negative(ctx):
    out = negative_battery(ctx.field, ctx.prec)
    for r in out["fixtures"]:
        ctx.say(f"{r['fixture']}: expected ({r['expected']}), failed at ({r['got']})")
    return ctx.report(out["passed"], **out), EXIT_PASS if out["passed"] else EXIT_MATH


def cmd_cocycles(ctx):
    out = cocycle_suite(ctx.field, ctx.args.count, ctx.seed, ctx.prec)
    return ctx.report(out["passed"], **out), EXIT_PASS if out["passed"] else EXIT_MATH


# ---------------------------------------------------------------------------


def _common(parser, top):
    d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    parser.add_argument("--p", default=d("7"), help="field: a prime p = 1 mod 3, or q-omega (default 7)")
    parser.add_argument("--prec", type=int, default=d(DEFAULT_PREC), help="certified precision N")
    parser.add_argument("--seed", type=int, default=d(0))
    parser.add_argument("--quiet", action="store_true", default=d(False), help="no progress on stderr")


def build_parser():
    ap = argparse.ArgumentParser(prog="trikit", description="Lattices for the ramified triality group.")
    _common(ap, True)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        _common(sp, False)
        sp.set_defaults(func=fn)
        return sp

    add("gram", cmd_gram, "print the Gram matrix derived from the multiplication table")
    sp = add("axioms", cmd_axioms, "random-sample check of the twisted composition identities")
    sp.add_argument("--samples", type=int, default=1000)
    for name, fn, help_ in (("check", cmd_check, "check conditions (1)-(4) for a lattice"),
                            ("normalize", cmd_normalize, "find g in G with g(std) = L")):
        sp = add(name, fn, help_)
        sp.add_argument("--lattice", required=True)
        sp.add_argument("--witness")
        sp.add_argument("--search-limit", type=int, default=64)
        if name == "normalize":
            sp.add_argument("-o", "--output")
    sp = add("member", cmd_member, "membership test for an 8x8 matrix")
    sp.add_argument("--g", required=True)
    sp = add("torus", cmd_torus, "torus element from monomials c*t^m")
    sp.add_argument("--mu1", required=True)
    sp.add_argument("--mu2", required=True)
    sp.add_argument("-o", "--output")
    sp = add("random", cmd_random, "random product of generators")
    sp.add_argument("--len", type=int, default=6)
    sp.add_argument("--pole-bound", type=int, default=2)
    sp.add_argument("-o", "--output")
    sp = add("lattice", cmd_lattice, "write the standard lattice, or its image under --g")
    sp.add_argument("--g")
    sp.add_argument("-o", "--output")
    sp = add("lift", cmd_lift, "complete a proper isometry g1 to a triple (g1, g2, g3)")
    sp.add_argument("--g", required=True)
    sp.add_argument("-o", "--output")
    sp = add("roundtrip", cmd_roundtrip, "random words through check and normalize")
    sp.add_argument("--words", type=int, default=100)
    sp.add_argument("--len", type=int, default=6)
    sp.add_argument("--pole-bound", type=int, default=2)
    sp.add_argument("--searches", type=int, default=0, help="also run the witness search on the first k words")
    add("negative", cmd_negative, "directed violations of conditions (1)-(4)")
    sp = add("cocycles", cmd_cocycles, "random twisted-conjugacy problems")
    sp.add_argument("--count", type=int, default=100)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    ctx = None
    try:
        ctx = _Ctx(args)
        rep, code = args.func(ctx)
    except MalformedInput as exc:
        rep, code = _error(args, ctx, "malformed input", exc), EXIT_INPUT
    except PrecisionError as exc:
        rep, code = _error(args, ctx, "precision", exc), EXIT_PREC
    except MathFailure as exc:
        rep, code = _error(args, ctx, "mathematical failure", exc), EXIT_MATH
    print(dump_json(rep))
    if ctx is not None:
        ctx.say(f"done, exit {code}")
    return code


def _error(args, ctx, kind, exc):
    msg = str(exc.args[0]) if exc.args else str(exc)
    out = {"command": args.command, "precision": args.prec, "seed": args.seed, "verdict": "fail",
           "error": kind, "message": msg}
    if ctx is not None:
        out["field"] = ctx.field.to_json()
    info = getattr(exc, "info", None)
    if not info and exc.args[1:] and isinstance(exc.args[1], dict):
        info = exc.args[1]
    if info:
        out["info"] = info
    print(f"trikit: {kind}: {msg}", file=sys.stderr)
    return out


if __name__ == "__main__":
    sys.exit(main())
