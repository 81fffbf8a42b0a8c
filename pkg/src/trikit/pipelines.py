"""Composed runs: forward/backward round trips, the negative battery, cocycles.

Each function returns plain dicts (JSON-ready) plus, where useful, the
objects behind them so tests can compare coefficients across precisions.
"""

from __future__ import annotations

import numpy as np

from . import algebra
from .errors import MathFailure, PrecisionError
from .field import Field
from .group import is_member, membership_report, random_group_element
from .lattice import (Lattice, _lifted_witnesses, check_all, check_parunit, lattice_equal)
from .linalg import JetMatrix, det, inverse
from .normalize import normalize_lattice, random_cocycle, twisted_conjugacy_solve
from .series import LaurentJet

__all__ = ["roundtrip_word", "roundtrip", "parunit_failure_witness", "negative_fixtures",
           "negative_battery", "cocycle_suite", "check_pole_budget"]


def check_pole_budget(pole_bound: int, prec: int):
    """Generators carry poles down to u^(-3 pole_bound); require twice that within prec."""
    if 6 * pole_bound > prec:
        raise PrecisionError(f"precision exhausted: pole_bound {pole_bound} needs prec >= {6 * pole_bound}, "
                             f"got {prec}")


def roundtrip_word(field: Field, seed, length: int, pole_bound: int, N: int, search: bool = False):
    """g -> L = g(std) -> check -> normalize -> g'.  Returns (record, g, g')."""
    g, word = random_group_element(field, seed, length, pole_bound, return_word=True)
    L = Lattice.standard(field, N).transform(g)
    a = g.column(3)
    rec = {"word": word, "forward": None, "search": None, "backward": None}
    rep = check_all(L, a, N)
    rec["forward"] = {"passed": rep.passed, "failed_condition": rep.failed}
    if search:
        srep = check_all(L, None, N)
        rec["search"] = {"passed": srep.passed, "failed_condition": srep.failed,
                         "residue": srep.conditions.get(3, {}).get("residue")}
    if not rep.passed:
        return rec, g, None
    g2, trace = normalize_lattice(L, a, N, report=rep)
    eq = lattice_equal(Lattice(g2, N), L)
    d = det(g2)
    rec["backward"] = {"lattice_equal": eq, "member": is_member(g2, N), "det_one": (d - 1).is_zero(),
                       "stages": trace.checks, "working_precision": trace.precision}
    return rec, g, g2


def _ok(rec):
    b = rec["backward"]
    return bool(rec["forward"]["passed"] and b and b["lattice_equal"] and b["member"] and b["det_one"])


def roundtrip(field: Field, words: int, length: int, pole_bound: int, seed: int, N: int,
              searches: int = 0, progress=None):
    """Round-trip ``words`` random words; the first ``searches`` also run the witness-free search."""
    check_pole_budget(pole_bound, N)
    out, objs = [], []
    for i in range(words):
        rec, g, g2 = roundtrip_word(field, (seed, i), length, pole_bound, N, search=i < searches)
        rec["index"] = i
        rec["ok"] = _ok(rec)
        out.append(rec)
        objs.append((g, g2))
        if progress:
            progress(i, rec)
    return {"words": words, "succeeded": sum(r["ok"] for r in out), "records": out}, objs


# ---------------------------------------------------------------------------
# negative battery


def parunit_failure_witness(field: Field, N: int, limit: int = 4096):
    """First searched witness of the standard lattice that passes (3) but fails (4)."""
    L = Lattice.standard(field, N)
    for a, c, info in _lifted_witnesses(L, N, limit):
        ok, _ = check_parunit(L, c, N)
        if not ok:
            return algebra.AlgebraElement(a), info["residue"]
    raise MathFailure("no para-unit failure among searched witnesses", {"limit": limit})


def negative_fixtures(field: Field, N: int):
    """[(name, lattice, witness or None, expected failing condition)]."""
    one = LaurentJet.one(field)
    u = LaurentJet.monomial(field, 1, 1)
    uinv = LaurentJet.monomial(field, 1, -1)
    std = Lattice.standard(field, N)
    e = [algebra.AlgebraElement.basis(field, i) for i in range(1, 9)]
    L1 = Lattice(JetMatrix.diag(field, [u] + [one] * 7), N)
    L2 = Lattice(JetMatrix.diag(field, [u] + [one] * 6 + [uinv]), N)
    a4, _ = parunit_failure_witness(field, N)
    return [
        ("not self-dual", L1, e[3], 1),
        ("not closed", L2, e[3], 2),
        ("bad witness", std, e[0], 3),
        ("witness not a para-unit", std, a4, 4),
    ]


def negative_battery(field: Field, N: int):
    out = []
    for name, L, w, want in negative_fixtures(field, N):
        rep = check_all(L, w, N)
        r = rep.to_json()
        r.pop("conditions", None)
        r.pop("witness", None)
        out.append({"fixture": name, "expected": want, "got": rep.failed,
                    "ok": rep.failed == want, "report": r,
                    "witness": [x.to_json() for x in (w.coords if w is not None else [])]})
    return {"passed": all(r["ok"] for r in out), "fixtures": out}


# ---------------------------------------------------------------------------
# cocycles


def cocycle_suite(field: Field, count: int, seed: int, N: int):
    """Solve b'^-1 (-A) rho(b') = I for A = -b rho(b)^-1 with random unimodular b."""
    rng = np.random.default_rng(seed)
    out = []
    I3 = JetMatrix.identity(field, 3)
    for i in range(count):
        A, _ = random_cocycle(field, rng, N)
        info = {}
        b2 = twisted_conjugacy_solve(A, N, info)
        res = inverse(b2, N) @ ((-A) @ b2.galois(1)) - I3
        ok = all(x.truncate(N).is_zero() and (x.prec is None or x.prec >= N) for x in res.entries())
        out.append({"index": i, "ok": ok, "corrections": sum(info.get("steps", [])),
                    "b": b2.truncate(N).to_json()})
    return {"passed": all(r["ok"] for r in out), "count": count, "records": out}
