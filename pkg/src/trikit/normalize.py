"""Constructive normalization: from a lattice L satisfying (1)-(4) to g with g(std) = L.

All intermediate vectors are B-coordinates of lattice vectors, computed mod
u^P.  Every stage asserts the identities it relies on, on the actual
computed bases; a failure raises MathFailure naming the stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from . import algebra
from .errors import MathFailure, PrecisionError
from .field import Field
from .group import membership_report
from .lattice import CoordAlgebra, Lattice, check_all, hensel_lift, lattice_equal
from .linalg import JetMatrix, column_reduce, det, inverse, k_rank
from .series import DEFAULT_PREC, LaurentJet

__all__ = [
    "SemilinearOp", "NormalizationTrace", "hyperbolic_pair", "complement_L0", "split_L1_L2",
    "semilinear_matrix", "twisted_conjugacy_solve", "dual_basis", "sign_normalize",
    "normalize_lattice", "random_cocycle",
]


def _fail(stage, what, **info):
    raise MathFailure(f"{stage}: {what}", dict(info, stage=stage))


def _is_zero_vec(v):
    return all(x.is_zero() for x in v)


def _sub(a, b):
    return [x - y for x, y in zip(a, b)]


def _add(a, b):
    return [x + y for x, y in zip(a, b)]


def _scal(c, v):
    return [c * x for x in v]


def _neg(v):
    return [-x for x in v]


def _lin(cols, coeffs):
    """sum_k coeffs[k] * cols[k]."""
    out = None
    for c, v in zip(coeffs, cols):
        if c.is_zero() and c.prec is None:
            continue
        t = _scal(c, v)
        out = t if out is None else _add(out, t)
    if out is None:
        f = cols[0][0].field
        return [LaurentJet.zero(f)] * len(cols[0])
    return out


@dataclass
class SemilinearOp:
    """t(m_j) = sum_k A[k][j] m_k; on coordinates c it acts as A rho(c) (twist 1)."""
    A: JetMatrix
    basis: list
    twist: int = 1


@dataclass
class NormalizationTrace:
    precision: int
    f1: list = None
    f2: list = None
    L0: list = None
    L1: list = None
    L2: list = None
    A1: JetMatrix = None
    b: JetMatrix = None
    x: list = None
    y: list = None
    sign_scalar: LaurentJet = None
    h: JetMatrix = None
    g: JetMatrix = None
    witness_source: str = ""
    checks: list = dc_field(default_factory=list)

    def note(self, name):
        self.checks.append(name)

    def to_json(self):
        def vecs(vs):
            return None if vs is None else [[x.to_json() for x in v] for v in vs]
        return {
            "precision": self.precision,
            "witness_source": self.witness_source,
            "f1": vecs([self.f1]) and vecs([self.f1])[0], "f2": vecs([self.f2]) and vecs([self.f2])[0],
            "L0": vecs(self.L0), "L1": vecs(self.L1), "L2": vecs(self.L2),
            "A1": None if self.A1 is None else self.A1.to_json(),
            "b": None if self.b is None else self.b.to_json(),
            "x": vecs(self.x), "y": vecs(self.y),
            "sign_scalar": None if self.sign_scalar is None else self.sign_scalar.to_json(),
            "checks": list(self.checks),
        }


# ---------------------------------------------------------------------------
# stages


def hyperbolic_pair(ca: CoordAlgebra, a, trace: NormalizationTrace | None = None):
    f1 = [x.truncate(ca.P) for x in a]
    f2 = ca.mul(f1, f1)
    one = LaurentJet.one(ca.field)
    checks = {
        "f2*f2 = f1": _is_zero_vec(_sub(ca.mul(f2, f2), f1)),
        "f1*f2 = 0": _is_zero_vec(ca.mul(f1, f2)),
        "f2*f1 = 0": _is_zero_vec(ca.mul(f2, f1)),
        "q(f1) = 0": ca.q(f1).is_zero(),
        "q(f2) = 0": ca.q(f2).is_zero(),
        "<f1,f2> = 1": (ca.pair(f1, f2) - one).is_zero(),
    }
    bad = [k for k, v in checks.items() if not v]
    if bad:
        _fail("hyperbolic", "hyperbolic verification failed", failed=bad)
    if trace is not None:
        trace.note("hyperbolic relations")
    return f1, f2


def _unit(field, i, P):
    v = [LaurentJet.zero(field, None)] * 8
    v[i] = LaurentJet.one(field)
    return v


def complement_L0(ca: CoordAlgebra, f1, f2, trace=None):
    """Six projected basis vectors spanning L0 = {x : <x,f1> = <x,f2> = 0}."""
    f = ca.field
    res = [[x.residue().raw for x in f1], [x.residue().raw for x in f2]]
    chosen = []
    for j in range(8):
        cand = res + [[f.one if k == i else f.zero for k in range(8)] for i in chosen + [j]]
        if k_rank(f, cand) == len(cand):
            chosen.append(j)
        if len(chosen) == 6:
            break
    if len(chosen) != 6:
        _fail("complement", "completion failed")
    out = []
    for j in chosen:
        v = _unit(f, j, ca.P)
        vp = _sub(_sub(v, _scal(ca.pair(f1, v), f2)), _scal(ca.pair(f2, v), f1))
        vp = [x.truncate(ca.P) for x in vp]
        if not (ca.pair(vp, f1).is_zero() and ca.pair(vp, f2).is_zero()):
            _fail("complement", "projection not orthogonal", column=j + 1)
        out.append(vp)
    full = [[x.residue().raw for x in v] for v in [f1, f2] + out]
    if k_rank(f, full) != 8:
        _fail("complement", "completion failed", reason="not unimodular")
    # L0 * f_i and f_i * L0 must stay in L0
    for v in out:
        for fi in (f1, f2):
            for w in (ca.mul(v, fi), ca.mul(fi, v)):
                if not (ca.pair(w, f1).is_zero() and ca.pair(w, f2).is_zero()):
                    _fail("complement", "L0 not stable under f_i")
    if trace is not None:
        trace.L0 = out
        trace.note("L0 orthogonal to f1, f2; unimodular completion; L0*f_i, f_i*L0 in L0")
    return out, chosen


def split_L1_L2(ca: CoordAlgebra, L0, f1, f2, trace=None):
    P = ca.P
    pi1 = [ca.mul(ca.mul(f2, x), f1) for x in L0]
    pi2 = [ca.mul(ca.mul(f1, x), f2) for x in L0]
    for x, a, b in zip(L0, pi1, pi2):
        if not _is_zero_vec(_sub(_add(a, b), x)):
            _fail("split", "pi1 + pi2 != id on L0")
    bases = []
    for name, imgs in (("L1", pi1), ("L2", pi2)):
        _, M = column_reduce(imgs, P)
        M = [[x.truncate(P) for x in v] for v in M]
        if len(M) != 3 or k_rank(ca.field, [[x.residue().raw for x in v] for v in M]) != 3:
            _fail("split", "rank != 3", sublattice=name, rank=len(M))
        bases.append(M)
    M1, M2 = bases
    for name, M in (("L1", M1), ("L2", M2)):
        for a in M:
            for b in M:
                if not ca.pair(a, b).is_zero():
                    _fail("split", "sublattice not isotropic", sublattice=name)
    # projector identity on the computed images
    for x in pi1[:2]:
        if not _is_zero_vec(_sub(ca.mul(ca.mul(f2, x), f1), x)):
            _fail("split", "pi1 not idempotent")
    # f_i * L_i = 0 and L_i * f_{i+1} = 0
    for m in M1:
        if not (_is_zero_vec(ca.mul(f1, m)) and _is_zero_vec(ca.mul(m, f2))):
            _fail("split", "f1*L1 or L1*f2 nonzero")
    for m in M2:
        if not (_is_zero_vec(ca.mul(f2, m)) and _is_zero_vec(ca.mul(m, f1))):
            _fail("split", "f2*L2 or L2*f1 nonzero")
    # L1*L2 in R f1, L2*L1 in R f2
    for x in M1:
        for y in M2:
            xy, yx = ca.mul(x, y), ca.mul(y, x)
            if not _is_zero_vec(_sub(xy, _scal(ca.pair(xy, f2), f1))):
                _fail("split", "L1*L2 not in R f1")
            if not _is_zero_vec(_sub(yx, _scal(ca.pair(yx, f1), f2))):
                _fail("split", "L2*L1 not in R f2")
    # L_i * L_i in L_{i+1}: orthogonal to f1, f2 and to L_{i+1}
    for Mi, Mj in ((M1, M2), (M2, M1)):
        for x in Mi:
            for y in Mi:
                w = ca.mul(x, y)
                if not all(ca.pair(w, z).is_zero() for z in [f1, f2] + Mj):
                    _fail("split", "L_i*L_i not in L_{i+1}")
    if trace is not None:
        trace.L1, trace.L2 = M1, M2
        trace.note("L0 = L1 + L2; isotropic; f_i*L_i = 0; L_i*f_(i+1) = 0; L1*L2 in R f1; L_i*L_i in L_(i+1)")
    return M1, M2


def _pairing(ca, X, Y):
    return JetMatrix(ca.field, [[ca.pair(x, y) for y in Y] for x in X])


def _coords_in(ca, M, Mdual, v, Pinv):
    """Coordinates of v in basis M using the perfect pairing with Mdual."""
    r = [ca.pair(v, z) for z in Mdual]
    return [x.truncate(ca.P) for x in Pinv @ r]


def semilinear_matrix(ca: CoordAlgebra, M, Mdual, fi, trace=None, name="t1"):
    """Matrix of t(x) = x * f_i on the basis M; asserts A rho(A) theta(A) = -I and residue -I."""
    P = ca.P
    Pi = _pairing(ca, M, Mdual)            # Pi[j][l] = <m_j, d_l>
    PiT_inv = inverse(Pi.T, P)
    images = [ca.mul(m, fi) for m in M]
    cols = [_coords_in(ca, M, Mdual, w, PiT_inv) for w in images]
    A = JetMatrix.from_columns(ca.field, cols)
    for w, c in zip(images, cols):
        if not _is_zero_vec(_sub(_lin(M, c), w)):
            _fail("semilinear", "t_i(L_i) not in L_i", operator=name)
    cube = A @ (A.galois(1) @ A.galois(2))
    if not (cube + JetMatrix.identity(ca.field, 3)).truncate(P).agrees(JetMatrix.zeros(ca.field, 3)):
        _fail("semilinear", "t^3 != -id", operator=name)
    res = A.residue()
    f = ca.field
    if any(res[i][j] != (f.neg(f.one) if i == j else f.zero) for i in range(3) for j in range(3)):
        _fail("semilinear", "residue not -I", operator=name, residue=[[f.raw_to_json(v) for v in r] for r in res])
    if trace is not None:
        trace.note(f"{name}: A rho(A) theta(A) = -I, residue -I")
    return SemilinearOp(A, M, 1)


def twisted_conjugacy_solve(A: JetMatrix, prec: int = DEFAULT_PREC, info: dict | None = None) -> JetMatrix:
    """Unimodular b with b^{-1} (-A) rho(b) = I mod u^prec.

    Successive approximation: with defect c = I + u^n E_n + ..., for 3 not
    dividing n set b <- b (I + u^n D), D = E_n / (1 - xi^n); for 3 | n the
    u^n slice must vanish, which is asserted.
    """
    f = A.field
    n3 = A.shape[0]
    I = JetMatrix.identity(f, n3)
    b = I
    c = (-A).truncate(prec)
    steps = []
    for n in range(1, prec):
        # invariant: c = b^{-1} (-A) rho(b) = I mod u^n
        defect = c - I
        if not defect.truncate(n).agrees(JetMatrix.zeros(f, n3)):
            _fail("cocycle", "defect not I below step", step=n)
        # c stays a cocycle, which is what forces the 3 | n slices to vanish
        if not (c @ c.galois(1) @ c.galois(2) - I).truncate(prec).agrees(JetMatrix.zeros(f, n3)):
            _fail("cocycle", "c rho(c) theta(c) != I", step=n)
        E = [[x.raw(n) for x in r] for r in defect.rows]
        nonzero = any(E[i][j] for i in range(n3) for j in range(n3))
        if n % 3 == 0:
            if nonzero:
                _fail("cocycle", f"obstruction nonzero at step {n}", step=n)
            steps.append(0)
            continue
        if not nonzero:
            steps.append(0)
            continue
        s = f.inv(f.sub(f.one, f.xi_pow(n)))
        Dn = JetMatrix(f, [[LaurentJet.monomial(f, f.mul(s, E[i][j]), n) for j in range(n3)]
                           for i in range(n3)])
        U = I + Dn
        # (I + u^n D)^{-1} = sum_k (-u^n D)^k mod u^prec
        Uinv, term, k = I, I, 1
        while k * n < prec:
            term = (term @ -Dn).truncate(prec)
            Uinv = Uinv + term
            k += 1
        b = (b @ U).truncate(prec)
        c = (Uinv @ (c @ U.galois(1))).truncate(prec)
        steps.append(1)
    resid = c - I
    if not resid.truncate(prec).agrees(JetMatrix.zeros(f, n3)):
        _fail("cocycle", "residual not I")
    if info is not None:
        info["steps"] = steps
        info["residual_precision"] = prec
    return b


def random_cocycle(field: Field, rng, prec: int = DEFAULT_PREC, degree: int = 6):
    """A := -b rho(b)^{-1} for a random unimodular polynomial 3x3 matrix b."""
    from .linalg import is_unimodular

    while True:
        rows = [[LaurentJet.from_dict(field, {e: field.random(rng) for e in range(degree + 1)})
                 for _ in range(3)] for _ in range(3)]
        b = JetMatrix(field, rows)
        if is_unimodular(b):
            break
    rb_inv = inverse(b.galois(1), prec)
    return (-(b @ rb_inv)).truncate(prec), b


def dual_basis(ca: CoordAlgebra, X, M2, f2, trace=None):
    """y_j in L2 with <x_i, y_j> = delta_ij; asserts t2(y_j) = -y_j."""
    P = ca.P
    Pi = _pairing(ca, X, M2)                 # <x_i, m_l>
    d = det(Pi)
    if not d.is_unit_integral():
        _fail("dual", "pairing not unimodular")
    Q = inverse(Pi, P)
    Y = [[x.truncate(P) for x in _lin(M2, Q.column(j))] for j in range(3)]
    one = LaurentJet.one(ca.field)
    for i in range(3):
        for j in range(3):
            v = ca.pair(X[i], Y[j]) - (one if i == j else 0)
            if not v.is_zero():
                _fail("dual", "pairing not identity", i=i + 1, j=j + 1)
    for y in Y:
        if not _is_zero_vec(_add(ca.mul(y, f2), y)):
            _fail("dual", "t2(y) != -y")
    # <x_i, t2(y_j)> = -delta_ij
    for i in range(3):
        for j in range(3):
            v = ca.pair(X[i], ca.mul(Y[j], f2)) + (one if i == j else 0)
            if not v.is_zero():
                _fail("dual", "<x, t2 y> != -delta")
    if trace is not None:
        trace.note("dual basis: <x_i,y_j> = delta, t2(y) = -y")
    return Y


def _wedge(ca, u, v, fi):
    """u ^ v = t^{-1}(u) * t(v), with t^{-1} = -t^2."""
    tinv = _neg(ca.mul(ca.mul(u, fi), fi))
    return ca.mul(tinv, ca.mul(v, fi))


def sign_normalize(ca: CoordAlgebra, X, Y, f1, f2, trace=None):
    P = ca.P
    X, Y = list(X), list(Y)
    # wedge alternation and trilinear antisymmetry on L1
    for u in X + [_add(X[0], X[1])]:
        if not _is_zero_vec(_wedge(ca, u, u, f1)):
            _fail("sign", "u ^ u != 0")
    tri = lambda a, b, c: ca.pair(a, _wedge(ca, b, c, f1))
    if not (tri(X[0], X[1], X[2]) + tri(X[0], X[2], X[1])).is_zero():
        _fail("sign", "trilinear form not alternating")
    if not (tri(X[1], X[0], X[2]) + tri(X[0], X[1], X[2])).is_zero():
        _fail("sign", "trilinear form not alternating")
    x12 = ca.mul(X[0], X[1])
    b = ca.pair(x12, X[2])
    if not b.is_unit_integral():
        _fail("sign", "x1*x2 scalar not a unit")
    if not (b - b.rho()).is_zero():
        _fail("sign", "x1*x2 scalar not rho-fixed")
    if not _is_zero_vec(_sub(x12, _scal(b, Y[2]))):
        _fail("sign", "x1*x2 not a multiple of y3")
    binv = b.invert_unit(P)
    Y[2] = [x.truncate(P) for x in _scal(-b, Y[2])]
    X[2] = [x.truncate(P) for x in _scal(-binv, X[2])]
    if trace is not None:
        trace.sign_scalar = b
        trace.note("wedge alternating; x1*x2 = b y3 with b a rho-fixed unit; rescaled")
    return X, Y, b


# assembly order: g(e1..e8) = x1, y3, y2, f1, f2, x2, x3, y1
def _assemble(X, Y, f1, f2):
    return [X[0], Y[2], Y[1], f1, f2, X[1], X[2], Y[0]]


def _verify_tables(ca: CoordAlgebra, cols):
    f = ca.field
    for i in range(8):
        for j in range(8):
            lhs = ca.mul(cols[i], cols[j])
            s = algebra.TABLE[i][j]
            if s:
                k = abs(s) - 1
                rhs = cols[k] if s > 0 else _neg(cols[k])
            else:
                rhs = [LaurentJet.zero(f)] * 8
            if not _is_zero_vec(_sub(lhs, rhs)):
                _fail("tables", "table mismatch", pair=[i + 1, j + 1])
    G = algebra.derive_gram()
    for i in range(8):
        for j in range(8):
            if not (ca.pair(cols[i], cols[j]) - G[i][j]).is_zero():
                _fail("tables", "Gram mismatch", pair=[i + 1, j + 1])


def _working_precision(L: Lattice, N: int):
    B = L.basis
    vals = [x.start for x in B.entries() if not x.is_zero()]
    spread = (max(vals) - min(vals)) if vals else 0
    return N + spread


def normalize_lattice(L: Lattice, witness=None, N: int | None = None, P: int | None = None,
                      report=None, max_rounds: int = 3):
    """Return (g, trace) with g in G and g(std) = L, certified to relative precision N."""
    N = N or L.prec
    if report is None:
        report = check_all(L, witness, N)
    if not report.passed:
        raise MathFailure("lattice fails the conditions", report.to_json())
    P = P or _working_precision(L, N)
    last = None
    for _ in range(max_rounds):
        try:
            return _normalize_at(L, report, N, P)
        except PrecisionError as exc:
            last = exc
            P += N
    raise last


def _normalize_at(L: Lattice, report, N: int, P: int):
    f = L.field
    ca = L.coord_algebra(P)
    trace = NormalizationTrace(P)
    trace.witness_source = report.conditions[3].get("source", "")
    if trace.witness_source == "search":
        a = hensel_lift(ca, report.conditions[3]["residue"], P)
    else:
        a = [x.truncate(P) for x in L.coords(report.witness, P)]
    f1, f2 = hyperbolic_pair(ca, a, trace)
    trace.f1, trace.f2 = f1, f2
    L0, _ = complement_L0(ca, f1, f2, trace)
    M1, M2 = split_L1_L2(ca, L0, f1, f2, trace)
    op1 = semilinear_matrix(ca, M1, M2, f1, trace, "t1")
    semilinear_matrix(ca, M2, M1, f2, trace, "t2")
    info = {}
    b = twisted_conjugacy_solve(op1.A, P, info)
    trace.A1, trace.b = op1.A, b
    X = [[x.truncate(P) for x in _lin(M1, b.column(j))] for j in range(3)]
    for x in X:
        if not _is_zero_vec(_add(ca.mul(x, f1), x)):
            _fail("cocycle", "t1(x) != -x")
    trace.note("cocycle solved: t1(x_i) = -x_i")
    Y = dual_basis(ca, X, M2, f2, trace)
    X, Y, _ = sign_normalize(ca, X, Y, f1, f2, trace)
    trace.x, trace.y = X, Y
    cols = _assemble(X, Y, f1, f2)
    _verify_tables(ca, cols)
    trace.note("assembled basis reproduces the multiplication table: all 64 products match")
    h = JetMatrix.from_columns(f, cols)
    dh = det(h)
    if not dh.is_unit_integral():
        _fail("assembly", "coordinate matrix not unimodular")
    trace.h = h
    g = L.basis @ h
    trace.g = g
    rep = membership_report(g, N)
    if not rep["det_one"]:
        _fail("assembly", "determinant != 1", det=rep.get("det"))
    if not rep["member"]:
        _fail("assembly", "assembled g not in G", **rep)
    if not lattice_equal(Lattice(g, L.prec), L):
        _fail("assembly", "g(std) != L")
    trace.note("g in G (isometry, det 1, multiplicative); g(std) = L")
    return g, trace
