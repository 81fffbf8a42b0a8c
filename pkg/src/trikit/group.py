"""The triality group G: membership, generators, triples and the lift.

A group element is an 8x8 JetMatrix g acting on coordinates; it lies in G
when it is an isometry, has determinant 1 and satisfies
g(e_i * e_j) = g(e_i) * g(e_j) on all basis pairs.
"""

from __future__ import annotations

import math

import numpy as np

from . import algebra
from .errors import MalformedInput, MathFailure, PrecisionError
from .field import Field
from .linalg import JetMatrix, det, k_nullspace, t_linear_solve
from .series import DEFAULT_PREC, LaurentJet

__all__ = [
    "membership_report", "is_member", "torus_element", "TORUS_WEIGHTS", "derivation_basis",
    "root_derivations", "exp_nilpotent", "nilpotency_index", "random_group_element",
    "sample_nilpotent", "check_triple", "rotate_triple", "triality_lift", "LiftResult",
    "diag_isometry",
]

# exponents of (mu1, mu2) in the torus weight of e1..e8
TORUS_WEIGHTS = ((1, 0), (1, 1), (0, -1), (0, 0), (0, 0), (0, 1), (-1, -1), (-1, 0))


def _floor_min(M: JetMatrix):
    v = M.min_valuation()
    return 0 if v is None else v


def _residual_ok(res: LaurentJet, floor: int, N: int, what: str):
    """True if zero and certified N slots past ``floor``; False if nonzero."""
    if not res.is_zero():
        return False
    if res.prec is not None and res.prec < floor + N:
        raise PrecisionError(f"precision exhausted: {what} residual known to u^{res.prec}, need u^{floor + N}")
    return True


def _mult_residuals(g: JetMatrix):
    cols = g.columns()
    f = g.field
    for i in range(8):
        for j in range(8):
            lhs = algebra.twisted_mul(cols[i], cols[j])
            s = algebra.TABLE[i][j]
            if s:
                k = abs(s) - 1
                rhs = cols[k] if s > 0 else [-x for x in cols[k]]
            else:
                rhs = [LaurentJet.zero(f)] * 8
            yield (i, j), [a - b for a, b in zip(lhs, rhs)]


def membership_report(g: JetMatrix, N: int = DEFAULT_PREC) -> dict:
    """Evaluate the three membership clauses; raises PrecisionError if undecidable."""
    if g.shape != (8, 8):
        raise MalformedInput("a group element is an 8x8 matrix")
    f = g.field
    v = _floor_min(g)
    G = JetMatrix.from_ints(f, algebra.derive_gram())
    rep = {"isometry": True, "det_one": True, "multiplicative": True, "certified": N}
    iso = g.T @ (G @ g) - G
    for idx, x in enumerate(iso.entries()):
        if not _residual_ok(x, min(2 * v, 0), N, "isometry"):
            rep["isometry"] = False
            rep["isometry_entry"] = [idx // 8 + 1, idx % 8 + 1]
            break
    d = det(g)
    if not _residual_ok(d - 1, min(8 * v, 0), N, "determinant"):
        rep["det_one"] = False
        rep["det"] = d.to_json()
    for (i, j), res in _mult_residuals(g):
        if not all(_residual_ok(x, min(2 * v, v), N, "multiplicativity") for x in res):
            rep["multiplicative"] = False
            rep["pair"] = [i + 1, j + 1]
            break
    rep["member"] = rep["isometry"] and rep["det_one"] and rep["multiplicative"]
    return rep


def is_member(g: JetMatrix, N: int = DEFAULT_PREC) -> bool:
    return membership_report(g, N)["member"]


def diag_isometry(field: Field, entries) -> JetMatrix:
    return JetMatrix.diag(field, entries)


# ---------------------------------------------------------------------------
# torus


def torus_element(field: Field, mu1: LaurentJet, mu2: LaurentJet, verify: bool = True) -> JetMatrix:
    for m in (mu1, mu2):
        if m.is_zero():
            raise MalformedInput("torus parameters must be invertible")
        if not m.is_rho_fixed():
            raise MalformedInput("not in F0: torus parameter is not rho-fixed")
    inv1, inv2 = mu1.invert_unit(), mu2.invert_unit()
    p1 = {1: mu1, -1: inv1, 0: LaurentJet.one(field)}
    p2 = {1: mu2, -1: inv2, 0: LaurentJet.one(field)}
    g = JetMatrix.diag(field, [p1[a] * p2[b] for a, b in TORUS_WEIGHTS])
    if verify and not is_member(g):
        raise MathFailure("torus element failed membership", membership_report(g))
    return g


# ---------------------------------------------------------------------------
# derivations


def _derivation_system(field: Field, support=None):
    """Rows of the linear system for constant derivations, unknown D[a][b] at 8a+b."""
    f = field
    unknowns = list(range(64)) if support is None else list(support)
    pos = {u: n for n, u in enumerate(unknowns)}
    rows = []
    for i in range(8):
        for j in range(8):
            # D(e_i * e_j) - D(e_i) * e_j - e_i * D(e_j) = 0, coordinate m
            eq = [dict() for _ in range(8)]
            s = algebra.TABLE[i][j]
            if s:
                k = abs(s) - 1
                for m in range(8):
                    eq[m][8 * m + k] = eq[m].get(8 * m + k, 0) + (1 if s > 0 else -1)
            for a, jj, k, sg in algebra.STRUCTURE:
                if jj == j:   # D(e_i) = sum_a D[a][i] e_a, then e_a * e_j
                    eq[k][8 * a + i] = eq[k].get(8 * a + i, 0) - sg
                if a == i:    # e_i * D(e_j), D(e_j) = sum_b D[b][j] e_b
                    eq[k][8 * jj + j] = eq[k].get(8 * jj + j, 0) - sg
            rows.extend(eq)
    Gm = algebra.derive_gram()
    for a in range(8):
        for b in range(8):
            # (D^T G + G D)[a][b] = sum_c D[c][a] G[c][b] + G[a][c] D[c][b]
            eq = {}
            for c in range(8):
                if Gm[c][b]:
                    eq[8 * c + a] = eq.get(8 * c + a, 0) + Gm[c][b]
                if Gm[a][c]:
                    eq[8 * c + b] = eq.get(8 * c + b, 0) + Gm[a][c]
            rows.append(eq)
    dense = []
    for eq in rows:
        if any(u not in pos and v for u, v in eq.items()):
            # an unknown outside the support must vanish; it is simply absent
            eq = {u: v for u, v in eq.items() if u in pos}
        r = [f.zero] * len(unknowns)
        for u, v in eq.items():
            if u in pos and v:
                r[pos[u]] = f.add(r[pos[u]], f.coerce(v))
        if any(r):
            dense.append(r)
    return dense, unknowns


def _to_matrix(field, vec, unknowns):
    M = [[field.zero] * 8 for _ in range(8)]
    for v, u in zip(vec, unknowns):
        M[u // 8][u % 8] = v
    return M


def derivation_basis(field: Field):
    """Basis (raw 8x8 matrices) of constant skew derivations of the table."""
    rows, unknowns = _derivation_system(field)
    return [_to_matrix(field, v, unknowns) for v in k_nullspace(field, rows, 64)]


def _weight(i):
    return TORUS_WEIGHTS[i]


def root_derivations(field: Field):
    """{root: basis of derivations of that torus weight} for nonzero weights."""
    roots = {}
    for a in range(8):
        for b in range(8):
            w = (_weight(a)[0] - _weight(b)[0], _weight(a)[1] - _weight(b)[1])
            if w != (0, 0):
                roots.setdefault(w, []).append(8 * a + b)
    out = {}
    for w, support in sorted(roots.items()):
        rows, unknowns = _derivation_system(field, support)
        # a derivation supported on one weight space must satisfy the full
        # system, so the restricted system keeps every equation
        ns = k_nullspace(field, rows, len(unknowns))
        if ns:
            out[w] = [_to_matrix(field, v, unknowns) for v in ns]
    return out


def _kmat_mul(f, A, B):
    n = len(A)
    return [[_kdot(f, A[i], [B[k][j] for k in range(n)]) for j in range(n)] for i in range(n)]


def _kdot(f, r, c):
    acc = f.zero
    for a, b in zip(r, c):
        if a and b:
            acc = f.add(acc, f.mul(a, b))
    return acc


def nilpotency_index(field: Field, D, bound: int = 9):
    """Least nu with D^nu = 0, or None if not nilpotent within ``bound``."""
    P = D
    for nu in range(1, bound + 1):
        if all(not x for r in P for x in r):
            return nu
        P = _kmat_mul(field, P, D)
    return None


def exp_nilpotent(field: Field, D, scale: LaurentJet | None = None, verify: bool = True,
                  N: int = DEFAULT_PREC) -> JetMatrix:
    """exp(scale * D) = sum_{j < nu} scale^j D^j / j!."""
    if scale is None:
        scale = LaurentJet.one(field)
    if not scale.is_rho_fixed():
        raise MalformedInput("not in F0: scale is not rho-fixed")
    nu = nilpotency_index(field, D)
    if nu is None:
        raise MathFailure("not nilpotent within index bound")
    if field.char and 2 * (nu - 1) >= field.char:
        raise MathFailure("characteristic too small for index", {"index": nu, "char": field.char})
    f = field
    acc = [[LaurentJet.const(f, int(i == j)) for j in range(8)] for i in range(8)]
    P = D
    s = scale
    for j in range(1, nu):
        c = f.inv(f.coerce(math.factorial(j)))
        for a in range(8):
            for b in range(8):
                if P[a][b]:
                    acc[a][b] = acc[a][b] + s.scale(f.mul(c, P[a][b]))
        P = _kmat_mul(f, P, D)
        s = s * scale
    g = JetMatrix(f, acc)
    if verify and not is_member(g, N):
        raise MathFailure("exponential failed membership", membership_report(g, N))
    return g


def sample_nilpotent(field: Field, rng, roots=None):
    """A random nonzero multiple of a root-space derivation, with its index."""
    roots = roots if roots is not None else root_derivations(field)
    keys = sorted(roots)
    w = keys[int(rng.integers(len(keys)))]
    basis = roots[w]
    f = field
    D = [[f.zero] * 8 for _ in range(8)]
    while all(not x for r in D for x in r):
        for B in basis:
            c = f.random(rng)
            for a in range(8):
                for b in range(8):
                    if B[a][b]:
                        D[a][b] = f.add(D[a][b], f.mul(c, B[a][b]))
    return w, D, nilpotency_index(f, D)


def _t_power(field, m):
    return LaurentJet.monomial(field, 1, 3 * m)


def random_group_element(field: Field, seed: int = 0, length: int = 6, pole_bound: int = 2,
                         verify: bool = True, return_word: bool = False):
    """A product of ``length`` generators, each with t-valuations in [-pole_bound, pole_bound].

    Generators are torus elements diag(t^m1, t^(m1+m2), ...) with
    |m1|, |m2|, |m1+m2| <= pole_bound, and exp(t^m D) for root-space D with
    |m| (nu - 1) <= pole_bound.
    """
    rng = np.random.default_rng(seed)
    roots = root_derivations(field)
    g = JetMatrix.identity(field, 8)
    word = []
    for _ in range(length):
        if rng.random() < 0.3:
            pairs = [(a, b) for a in range(-pole_bound, pole_bound + 1)
                     for b in range(-pole_bound, pole_bound + 1) if abs(a + b) <= pole_bound]
            m1, m2 = pairs[int(rng.integers(len(pairs)))]
            h = torus_element(field, _t_power(field, m1), _t_power(field, m2), verify=False)
            word.append({"torus": [m1, m2]})
        else:
            w, D, nu = sample_nilpotent(field, rng, roots)
            mmax = pole_bound // max(nu - 1, 1)
            m = int(rng.integers(-mmax, mmax + 1))
            h = exp_nilpotent(field, D, _t_power(field, m), verify=False)
            word.append({"root": list(w), "m": m, "index": nu})
        g = g @ h
    if verify and not is_member(g):
        raise MathFailure("random word failed membership", membership_report(g))
    return (g, word) if return_word else g


# ---------------------------------------------------------------------------
# triples


def _apply(g: JetMatrix, v):
    return g @ list(v)


def check_triple(g1: JetMatrix, g2: JetMatrix, g3: JetMatrix, N: int = DEFAULT_PREC) -> bool:
    """g_i(x*y) = g_{i+1}(x) * g_{i+2}(y) for i = 1, 2, 3 on all basis pairs."""
    gs = (g1, g2, g3)
    f = g1.field
    v = min(_floor_min(g) for g in gs)
    for i in range(3):
        gi, ga, gb = gs[i], gs[(i + 1) % 3], gs[(i + 2) % 3]
        ca, cb, ci = ga.columns(), gb.columns(), gi.columns()
        for a in range(8):
            for b in range(8):
                lhs = algebra.twisted_mul(ca[a], cb[b])
                s = algebra.TABLE[a][b]
                if s:
                    k = abs(s) - 1
                    rhs = ci[k] if s > 0 else [-x for x in ci[k]]
                else:
                    rhs = [LaurentJet.zero(f)] * 8
                for x, y in zip(lhs, rhs):
                    if not _residual_ok(x - y, min(2 * v, v), N, "triple"):
                        return False
    return True


def rotate_triple(T):
    g1, g2, g3 = T
    return (g2, g3, g1)


class LiftResult:
    def __init__(self, g2, g3, info):
        self.g2, self.g3, self.info = g2, g3, info

    def pair(self, sign=1):
        if sign == 1:
            return self.g2, self.g3
        return -self.g2, -self.g3


def _lift_equations(g1: JetMatrix):
    """Semilinear equations in the unknowns of (g2, g3).

    Unknown 8r+c is g2[r][c]; 64+8r+c is g3[r][c].  Families:
      g2(e_a * e_b) = g3(e_a) * g1(e_b)
      g3(e_a * e_b) = g1(e_a) * g2(e_b)
    with x*y = rho(x) star theta(y).
    """
    f = g1.field
    c1 = g1.columns()
    r1 = [[x.rho() for x in col] for col in c1]
    t1 = [[x.theta() for x in col] for col in c1]
    one = LaurentJet.one(f)
    eqs = []
    for fam in (0, 1):
        lhs_off, rhs_off = (0, 64) if fam == 0 else (64, 0)
        for a in range(8):
            for b in range(8):
                eq = [dict() for _ in range(8)]
                s = algebra.TABLE[a][b]
                if s:
                    k = abs(s) - 1
                    sign = one if s > 0 else -one
                    for m in range(8):
                        eq[m][(lhs_off + 8 * m + k, 0)] = sign
                for i, j, k, sg in algebra.STRUCTURE:
                    if fam == 0:
                        # rho(g3[i][a]) * theta(g1[j][b]) at coordinate k
                        coef = t1[b][j]
                        key = (rhs_off + 8 * i + a, 1)
                    else:
                        # rho(g1[i][a]) * theta(g2[j][b])
                        coef = r1[a][i]
                        key = (rhs_off + 8 * j + b, 2)
                    if coef.is_zero():
                        continue
                    c = coef if sg < 0 else -coef
                    eq[k][key] = eq[k][key] + c if key in eq[k] else c
                eqs.extend(e for e in eq if e)
    return eqs


def triality_lift(g1: JetMatrix, N: int = DEFAULT_PREC) -> LiftResult:
    """(g2, g3) completing g1 to a triple, normalized so that g2 is an isometry.

    Raises MalformedInput if g1 is not a proper isometry and MathFailure
    "no lift over base field" when the required scale is not a square in F.
    """
    f = g1.field
    rep = membership_report(g1, N)
    if not (rep["isometry"] and rep["det_one"]):
        raise MalformedInput("triality lift needs a proper isometry", rep)
    eqs = _lift_equations(g1)
    work = N + 2 * max(0, -_floor_min(g1)) + 8
    basis, solve_info = t_linear_solve(eqs, 128, f, work)
    info = {"dim_t": solve_info["dim_t"], "dim_F": solve_info.get("dim_F"), "method": solve_info["method"]}
    if not basis:
        raise MathFailure("solution space dimension != 1 over k((t))", info)
    vec = basis[0]
    g2 = JetMatrix(f, [[vec[8 * r + c] for c in range(8)] for r in range(8)])
    g3 = JetMatrix(f, [[vec[64 + 8 * r + c] for c in range(8)] for r in range(8)])
    G = JetMatrix.from_ints(f, algebra.derive_gram())
    S = g2.T @ (G @ g2)
    # S = mu G with mu in F; read mu off <e4, e5>
    mu = S[3, 4]
    if mu.is_zero():
        raise MathFailure("lift is not a similitude", info)
    if not (S - G.scale(mu)).agrees(JetMatrix.zeros(f, 8)):
        raise MathFailure("lift is not a similitude", info)
    target = mu.invert_unit(work)
    lam2 = target
    lam = lam2.sqrt(work)
    info["multiplier"] = mu.to_json()
    if lam is None:
        raise MathFailure("no lift over base field", dict(info, reason="spinor norm: scale is not a square in F",
                                                          scale=lam2.to_json()))
    g2 = g2.scale(lam)
    g3 = g3.scale(lam.theta())
    # canonical sign: first nonzero entry of g2 (row-major) has canonical leading coefficient
    for x in g2.entries():
        if not x.is_zero():
            if f.canonical_sign(x.c[0]) < 0:
                g2, g3 = -g2, -g3
            break
    info["signs"] = "+/-"
    return LiftResult(g2, g3, info)
