"""Lattices in V and the checker for the four lattice conditions.

A lattice is the k[[u]]-column span of an 8x8 jet matrix B.  Products and
pairings of lattice vectors are handled in B-coordinates: a vector of L is an
integral coordinate vector c (so B c is the vector), and everything is
computed mod u^P for a working precision P.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import algebra
from .errors import MalformedInput, MathFailure, PrecisionError
from .field import Field
from .linalg import (JetMatrix, det, inverse, k_nullspace, k_rank, min_valuation)
from .series import DEFAULT_PREC, LaurentJet

__all__ = [
    "Lattice", "CoordAlgebra", "ConditionReport", "lattice_equal", "check_self_dual",
    "check_closed", "find_witness", "residue_algebra", "check_parunit", "check_all",
    "residue_witnesses", "hensel_lift", "gram_matrix",
]


def gram_matrix(field: Field) -> JetMatrix:
    return JetMatrix.from_ints(field, algebra.derive_gram())


class Lattice:
    """Column span over k[[u]] of an 8x8 basis matrix."""

    def __init__(self, basis: JetMatrix, prec: int = DEFAULT_PREC):
        if basis.shape != (8, 8):
            raise MalformedInput("a lattice basis is an 8x8 matrix")
        self.basis = basis
        self.field = basis.field
        self.prec = prec
        self._cache = {}

    @classmethod
    def standard(cls, field: Field, prec: int = DEFAULT_PREC):
        return cls(JetMatrix.identity(field, 8), prec)

    def transform(self, g: JetMatrix):
        """g L."""
        return Lattice(g @ self.basis, self.prec)

    def column(self, j):
        return self.basis.column(j)

    def to_json(self):
        # columns, one jet list per basis vector
        return {"field": self.field.to_json(), "prec": self.prec,
                "basis": [[x.to_json() for x in col] for col in self.basis.columns()]}

    @classmethod
    def from_json(cls, obj, field=None):
        from .field import make_field

        if not isinstance(obj, dict) or "basis" not in obj:
            raise MalformedInput("lattice file needs a 'basis'")
        f = field or make_field(obj.get("field", 7))
        cols = JetMatrix.from_json(f, obj["basis"])
        if cols.shape != (8, 8):
            raise MalformedInput("a lattice basis has 8 columns of 8 jets")
        return cls(cols.T, obj.get("prec") or DEFAULT_PREC)

    # -- cached derived data -----------------------------------------------
    def gram(self) -> JetMatrix:
        """B^T G B."""
        if "gram" not in self._cache:
            B = self.basis
            self._cache["gram"] = B.T @ (gram_matrix(self.field) @ B)
        return self._cache["gram"]

    def span_inverse(self, target: int) -> JetMatrix:
        """B^{-1} with entries known to absolute precision >= target."""
        cached = self._cache.get("inv")
        if cached is not None and cached[0] >= target:
            return cached[1]
        M = inverse(self.basis, target)
        self._cache["inv"] = (target, M)
        return M

    def coords(self, v, prec: int):
        """B^{-1} v with absolute precision >= prec."""
        vv = min_valuation(v)
        Binv = self.span_inverse(prec - (vv if vv is not None else 0))
        return Binv @ list(v)

    def coord_algebra(self, P: int) -> "CoordAlgebra":
        ca = self._cache.get("ca")
        if ca is not None and ca.P >= P:
            return ca
        ca = CoordAlgebra.build(self, P)
        self._cache["ca"] = ca
        return ca


class CoordAlgebra:
    """Structure constants and Gram matrix of L in its basis, mod u^P.

    ``C[i][j]`` is the coordinate vector of b_i*b_j (jets, possibly
    non-integral if L is not closed); zero entries are omitted from
    ``terms``.
    """

    def __init__(self, field, P, C, gram, terms):
        self.field, self.P, self.C, self.gram, self.terms = field, P, C, gram, terms

    @classmethod
    def build(cls, L: Lattice, P: int):
        B = L.basis
        f = L.field
        cols = B.columns()
        vB = B.min_valuation() or 0
        Binv = L.span_inverse(P - 2 * vB)
        C = [[None] * 8 for _ in range(8)]
        terms = []
        for i in range(8):
            for j in range(8):
                prod = algebra.twisted_mul(cols[i], cols[j])
                z = [x.truncate(P) for x in Binv @ prod]
                C[i][j] = z
                for k, x in enumerate(z):
                    if not x.is_zero():
                        terms.append((i, j, k, x))
        gram = L.gram().truncate(P)
        return cls(f, P, C, gram, terms)

    def closure_failure(self):
        """First pair (i, j) (0-based) whose product has a non-integral coordinate."""
        for i in range(8):
            for j in range(8):
                for x in self.C[i][j]:
                    if x.prec is not None and x.prec <= 0 and x.is_zero():
                        raise PrecisionError("insufficient precision to decide closure")
                    if not x.is_integral():
                        return (i, j)
        return None

    # -- arithmetic in coordinates (all results mod u^P) --------------------
    def mul(self, c, d):
        P = self.P
        rc = [x.rho() for x in c]
        td = [x.theta() for x in d]
        live_c = [not x.is_zero() for x in c]
        live_d = [not x.is_zero() for x in d]
        pair = {}
        out = [None] * 8
        for i, j, k, s in self.terms:
            if not (live_c[i] and live_d[j]):
                continue
            pp = pair.get((i, j))
            if pp is None:
                pp = pair[(i, j)] = (rc[i] * td[j]).truncate(P)
            t = pp * s
            out[k] = t if out[k] is None else out[k] + t
        z = LaurentJet.zero(self.field, P)
        return [z if v is None else v.truncate(P) for v in out]

    def pair(self, c, d):
        g = self.gram.rows
        acc = None
        for i in range(8):
            if c[i].is_zero():
                continue
            for j in range(8):
                if d[j].is_zero() or g[i][j].is_zero():
                    continue
                t = c[i] * g[i][j] * d[j]
                acc = t if acc is None else acc + t
        return (acc if acc is not None else LaurentJet.zero(self.field)).truncate(self.P)

    def q(self, c):
        f = self.field
        return self.pair(c, c).scale(f.inv(f.coerce(2)))

    def residue_constants(self):
        """Residue structure constants c[i][j][k] and residue Gram as raw values."""
        f = self.field
        C = [[[x.residue().raw for x in self.C[i][j]] for j in range(8)] for i in range(8)]
        G = [[x.residue().raw for x in r] for r in self.gram.rows]
        return C, G


def _zero(v):
    return all(x.is_zero() for x in v)


# ---------------------------------------------------------------------------


def lattice_equal(L1: Lattice, L2: Lattice, prec: int = 0) -> bool:
    """Equal column spans: B1^{-1} B2 and B2^{-1} B1 are both integral."""
    for A, B in ((L1, L2), (L2, L1)):
        vB = B.basis.min_valuation() or 0
        Ainv = A.span_inverse(max(prec, 0) + 1 - vB)
        M = Ainv @ B.basis
        for x in M.entries():
            if x.is_zero() and x.prec is not None and x.prec <= 0:
                raise PrecisionError("precision exhausted deciding lattice equality")
        if not M.is_integral():
            return False
    return True


def check_self_dual(L: Lattice):
    """Condition (1).  Returns (verdict, info)."""
    M = L.gram()
    integral = M.is_integral()
    d = det(M)
    info = {"gram_integral": integral}
    if d.is_zero():
        if d.prec is None:
            return False, dict(info, det="0")
        raise PrecisionError("indeterminate valuation of the Gram determinant")
    info["gram_det_valuation"] = d.start
    db = det(L.basis)
    if not db.is_zero():
        # relative index of L against the standard lattice; half the Gram valuation
        info["det_valuation"] = db.start
    return bool(integral and d.start == 0), info


def check_closed(L: Lattice, P: int | None = None):
    """Condition (2).  Returns (verdict, info); info names the first failing pair."""
    ca = L.coord_algebra(P or L.prec)
    bad = ca.closure_failure()
    if bad is None:
        return True, {}
    i, j = bad
    cols = L.basis.columns()
    prod = algebra.twisted_mul(cols[i], cols[j])
    return False, {"pair": [i + 1, j + 1], "product": [x.to_json() for x in prod],
                   "coords": [x.to_json() for x in ca.C[i][j]]}


# ---------------------------------------------------------------------------
# condition (3): witnesses


def _certified(jet: LaurentJet, floor: int, N: int) -> bool:
    """jet vanishes, known at least N slots past ``floor``."""
    if not jet.is_zero():
        return False
    if jet.prec is not None and jet.prec < floor + N:
        raise PrecisionError(f"precision exhausted: residual known to u^{jet.prec}, need u^{floor + N}")
    return True


def verify_witness(L: Lattice, a, N: int):
    """Check a in L, q(a) = 0 and <a*a, a> = 1.  Returns (ok, info, coords)."""
    a = list(a.coords if isinstance(a, algebra.AlgebraElement) else a)
    c = L.coords(a, N)
    for x in c:
        if x.is_zero() and x.prec is not None and x.prec <= 0:
            raise PrecisionError("precision exhausted deciding witness membership")
    if not all(x.is_integral() for x in c):
        return False, {"reason": "not in lattice"}, c
    va = min_valuation(a)
    va = 0 if va is None else va
    qa = algebra.quadratic(a)
    Ta = algebra.trace_form(a)
    info = {"q": qa.to_json(), "T": Ta.to_json()}
    if not _certified(qa, 2 * va, N):
        return False, dict(info, reason="q(a) != 0"), c
    if not _certified(Ta - 1, min(3 * va, 0), N):
        return False, dict(info, reason="<a*a,a> != 1"), c
    return True, info, c


def residue_witnesses(ca: CoordAlgebra, limit: int | None = None, chunk: int = 200_000):
    """Residue vectors c with q(c) = 0 and T(c) = 1 over F_p, in index order.

    Index n encodes c_i = digit i of n in base p.  Yields numpy int vectors.
    """
    f = ca.field
    if f.kind != "prime":
        raise MalformedInput("residue search needs the prime backend; provide a witness")
    p = f.p
    C, G = ca.residue_constants()
    Gm = np.array(G, dtype=np.int64) % p
    tau = np.zeros((8, 8, 8), dtype=np.int64)
    Cm = np.array(C, dtype=np.int64)
    # tau[i, j, l] = <b_i * b_j, b_l> mod u
    tau = np.einsum("ijm,ml->ijl", Cm, Gm) % p
    tau2 = tau.reshape(64, 8)
    half = pow(2, p - 2, p)
    pw = p ** np.arange(8, dtype=np.int64)
    total = p ** 8
    count = 0
    for st in range(0, total, chunk):
        idx = np.arange(st, min(total, st + chunk), dtype=np.int64)
        c = (idx[:, None] // pw) % p
        q = (np.einsum("ni,ij,nj->n", c, Gm, c) * half) % p
        sel = np.flatnonzero(q == 0)
        if not len(sel):
            continue
        cs = c[sel]
        W = (cs[:, :, None] * cs[:, None, :]).reshape(len(cs), 64) @ tau2
        T = (W * cs).sum(axis=1) % p
        for r in cs[T == 1]:
            yield r
            count += 1
            if limit is not None and count >= limit:
                return


def hensel_lift(ca: CoordAlgebra, c0, N: int):
    """Lift a residue witness to c with q(c) = 0, T(c) = 1 mod u^N (coordinates)."""
    f = ca.field
    P = min(N, ca.P)
    c = [LaurentJet.const(f, int(v)) for v in c0]
    Gres = [[x.residue().raw for x in r] for r in ca.gram.rows]
    C, _ = ca.residue_constants()
    cb = [f.coerce(int(v)) for v in c0]
    # gradient pieces at the residue: tau(d, c, c), tau(c, d, c), tau(c, c, d)
    tau = [[[f.zero] * 8 for _ in range(8)] for _ in range(8)]
    for i in range(8):
        for j in range(8):
            for l in range(8):
                acc = f.zero
                for m in range(8):
                    if C[i][j][m] and Gres[m][l]:
                        acc = f.add(acc, f.mul(C[i][j][m], Gres[m][l]))
                tau[i][j][l] = acc

    def grad(slot):
        g = [f.zero] * 8
        for i in range(8):
            for j in range(8):
                for l in range(8):
                    t = tau[i][j][l]
                    if not t:
                        continue
                    idx = (i, j, l)[slot]
                    others = [x for s, x in enumerate((i, j, l)) if s != slot]
                    g[idx] = f.add(g[idx], f.mul(t, f.mul(cb[others[0]], cb[others[1]])))
        return g

    g1, g2, g3 = grad(0), grad(1), grad(2)
    Jq = [f.zero] * 8
    for i in range(8):
        for j in range(8):
            if Gres[i][j] and cb[j]:
                Jq[i] = f.add(Jq[i], f.mul(Gres[i][j], cb[j]))
    one = LaurentJet.one(f)
    for n in range(1, P):
        qv = ca.q(c)
        Tv = ca.pair(ca.mul(c, c), c) - one
        rq, rT = qv.raw(n), Tv.raw(n)
        for m in range(n):
            if qv.raw(m) or Tv.raw(m):
                raise MathFailure("lift stalled", {"step": n, "reason": "lower residual nonzero"})
        xn, x2n = f.xi_pow(n), f.xi_pow(2 * n)
        JT = [f.add(f.add(f.mul(xn, g1[i]), f.mul(x2n, g2[i])), g3[i]) for i in range(8)]
        rows, rhs = [], []
        if any(Jq):
            rows.append(Jq)
            rhs.append(f.neg(rq))
        elif rq:
            raise MathFailure("lift stalled", {"step": n})
        if any(JT):
            rows.append(JT)
            rhs.append(f.neg(rT))
        elif rT:
            raise MathFailure("lift stalled", {"step": n})
        d = _pair_solve(f, rows, rhs)
        if d is None:
            raise MathFailure("lift stalled", {"step": n})
        c = [x + LaurentJet.monomial(f, v, n) if v else x for x, v in zip(c, d)]
    # final residual check mod u^P
    qv = ca.q(c)
    Tv = ca.pair(ca.mul(c, c), c) - one
    if not (qv.truncate(P).is_zero() and Tv.truncate(P).is_zero()):
        raise MathFailure("lift stalled", {"step": P})
    return [x.truncate(P) for x in c]


def _pair_solve(f, rows, rhs):
    """Solve rows . d = rhs using one (or two) free coordinates, others frozen at 0."""
    if not rows:
        return [f.zero] * 8
    if len(rows) == 1:
        (r,), (b,) = rows, rhs
        for i in range(8):
            if r[i]:
                d = [f.zero] * 8
                d[i] = f.div(b, r[i])
                return d
        return None
    (r1, r2), (b1, b2) = rows, rhs
    for i in range(8):
        for j in range(i + 1, 8):
            dt = f.sub(f.mul(r1[i], r2[j]), f.mul(r1[j], r2[i]))
            if not dt:
                continue
            inv = f.inv(dt)
            d = [f.zero] * 8
            d[i] = f.mul(inv, f.sub(f.mul(b1, r2[j]), f.mul(b2, r1[j])))
            d[j] = f.mul(inv, f.sub(f.mul(r1[i], b2), f.mul(r2[i], b1)))
            return d
    return None


def find_witness(L: Lattice, provided=None, N: int | None = None, limit: int = 64):
    """Condition (3).  Returns (witness coords in standard basis, coords in B, info).

    With ``provided`` the element is verified; otherwise residue witnesses are
    enumerated and lifted (first success wins).
    """
    N = N or L.prec
    if provided is not None:
        ok, info, c = verify_witness(L, provided, N)
        if not ok:
            raise MathFailure(info.get("reason", "witness rejected"), info)
        a = list(provided.coords if isinstance(provided, algebra.AlgebraElement) else provided)
        return a, c, dict(info, source="provided")
    for cand in _lifted_witnesses(L, N, limit):
        return cand
    raise MathFailure("no witness found", {})


def _lifted_witnesses(L: Lattice, N: int, limit: int):
    ca = L.coord_algebra(N)
    stalled = 0
    for r in residue_witnesses(ca, limit=limit):
        try:
            c = hensel_lift(ca, r, N)
        except MathFailure:
            stalled += 1
            continue
        a = L.basis @ c
        yield a, c, {"source": "search", "residue": [int(v) for v in r], "stalled_before": stalled}
    if stalled:
        raise MathFailure("lift stalled", {"stalled": stalled})


# ---------------------------------------------------------------------------
# condition (4)


@dataclass
class ResidueAlgebra:
    field: Field
    consts: list   # consts[i][j][k]
    gram: list

    def star(self, x, y):
        f = self.field
        out = [f.zero] * 8
        for i in range(8):
            if not x[i]:
                continue
            for j in range(8):
                if not y[j]:
                    continue
                xy = f.mul(x[i], y[j])
                row = self.consts[i][j]
                for k in range(8):
                    if row[k]:
                        out[k] = f.add(out[k], f.mul(xy, row[k]))
        return out

    def pair(self, x, y):
        f = self.field
        acc = f.zero
        for i in range(8):
            for j in range(8):
                if x[i] and y[j] and self.gram[i][j]:
                    acc = f.add(acc, f.mul(f.mul(x[i], self.gram[i][j]), y[j]))
        return acc


def residue_algebra(L: Lattice, P: int | None = None) -> ResidueAlgebra:
    ca = L.coord_algebra(P or L.prec)
    bad = ca.closure_failure()
    if bad is not None:
        raise MathFailure("residue algebra needs L*L in L", {"pair": [bad[0] + 1, bad[1] + 1]})
    C, G = ca.residue_constants()
    return ResidueAlgebra(L.field, C, G)


def check_parunit(L: Lattice, a_coords, P: int | None = None):
    """Condition (4) for the witness with B-coordinates ``a_coords``."""
    ca = L.coord_algebra(P or L.prec)
    R = residue_algebra(L, P)
    f = L.field
    e = [x + y for x, y in zip(a_coords, ca.mul(a_coords, a_coords))]
    eb = [x.residue().raw for x in e]
    ge = [R.pair([f.one if k == i else f.zero for k in range(8)], eb) for i in range(8)]
    comp = k_nullspace(f, [ge], 8)
    for x in comp:
        minus = [f.neg(v) for v in x]
        if R.star(eb, x) != minus or R.star(x, eb) != minus:
            return False, {"e_residue": [f.raw_to_json(v) for v in eb],
                           "x": [f.raw_to_json(v) for v in x],
                           "e*x": [f.raw_to_json(v) for v in R.star(eb, x)],
                           "x*e": [f.raw_to_json(v) for v in R.star(x, eb)]}
    return True, {"e_residue": [f.raw_to_json(v) for v in eb], "complement_dim": len(comp)}


# ---------------------------------------------------------------------------


@dataclass
class ConditionReport:
    passed: bool
    failed: int | None = None
    conditions: dict = dc_field(default_factory=dict)
    witness: list | None = None
    witness_coords: list | None = None
    precision: int = DEFAULT_PREC

    def to_json(self):
        out = {"passed": self.passed, "failed_condition": self.failed, "precision": self.precision,
               "conditions": {str(k): v for k, v in self.conditions.items()}}
        if self.witness is not None:
            out["witness"] = [x.to_json() for x in self.witness]
        if self.failed is not None:
            out["condition"] = self.failed
            out.update({k: v for k, v in self.conditions[self.failed].items() if k != "verdict"})
        return out


def check_all(L: Lattice, witness=None, N: int | None = None, search_limit: int = 64) -> ConditionReport:
    """Run conditions (1)-(4) in order, stopping at the first failure."""
    N = N or L.prec
    rep = ConditionReport(False, precision=N)
    ok, info = check_self_dual(L)
    rep.conditions[1] = dict(info, verdict=ok, certified=N)
    if not ok:
        rep.failed = 1
        return rep
    ok, info = check_closed(L, N)
    rep.conditions[2] = dict(info, verdict=ok, certified=N)
    if not ok:
        rep.failed = 2
        return rep
    if witness is not None:
        ok, info, c = verify_witness(L, witness, N)
        rep.conditions[3] = dict(info, verdict=ok, source="provided", certified=N)
        if not ok:
            rep.failed = 3
            return rep
        a = list(witness.coords if isinstance(witness, algebra.AlgebraElement) else witness)
        ok4, info4 = check_parunit(L, [x.truncate(N) for x in c], N)
        rep.conditions[4] = dict(info4, verdict=ok4, certified=N)
        rep.witness, rep.witness_coords = a, c
        rep.failed = None if ok4 else 4
        rep.passed = ok4
        return rep
    first_fail = None
    tried = 0
    try:
        for a, c, info in _lifted_witnesses(L, N, search_limit):
            tried += 1
            ok4, info4 = check_parunit(L, c, N)
            if ok4:
                rep.conditions[3] = dict(info, verdict=True, certified=N, candidates_tried=tried)
                rep.conditions[4] = dict(info4, verdict=True, certified=N)
                rep.witness, rep.witness_coords = a, c
                rep.passed = True
                return rep
            if first_fail is None:
                first_fail = (a, c, info, info4)
    except MathFailure as exc:
        if first_fail is None:
            rep.conditions[3] = {"verdict": False, "reason": str(exc), **exc.info}
            rep.failed = 3
            return rep
    if first_fail is None:
        rep.conditions[3] = {"verdict": False, "reason": "no witness found"}
        rep.failed = 3
        return rep
    a, c, info, info4 = first_fail
    rep.conditions[3] = dict(info, verdict=True, certified=N, candidates_tried=tried)
    rep.conditions[4] = dict(info4, verdict=False, certified=N)
    rep.witness, rep.witness_coords = a, c
    rep.failed = 4
    return rep
