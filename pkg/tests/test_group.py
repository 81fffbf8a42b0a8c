import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trikit import algebra
from trikit.errors import MalformedInput, MathFailure
from trikit.field import make_field
from trikit.group import (TORUS_WEIGHTS, check_triple, derivation_basis, exp_nilpotent, is_member,
                          membership_report, nilpotency_index, random_group_element, root_derivations,
                          rotate_triple, sample_nilpotent, torus_element, triality_lift)
from trikit.linalg import JetMatrix, det, inverse
from trikit.series import LaurentJet

F = make_field(7)
one = LaurentJet.one(F)
t = LaurentJet.monomial(F, 1, 3)
ti = LaurentJet.monomial(F, 1, -3)
u = LaurentJet.monomial(F, 1, 1)
I8 = JetMatrix.identity(F, 8)


def T(m):
    return LaurentJet.monomial(F, 1, 3 * m)


def diag_end(m):
    return JetMatrix.diag(F, [T(m)] + [one] * 6 + [T(-m)])


@pytest.fixture(scope="module")
def roots():
    return root_derivations(F)


# -- membership ----------------------------------------------------------------

def test_membership_examples():
    assert is_member(I8)
    rep = membership_report(diag_end(1))
    assert rep["isometry"] and rep["det_one"] and not rep["multiplicative"]
    assert is_member(torus_element(F, t * t, t))


def test_torus_examples():
    assert torus_element(F, one, one).agrees(I8)
    g = torus_element(F, t, one)
    want = [t, t, one, one, one, one, ti, ti]
    assert all(g[i, i] == want[i] for i in range(8))
    with pytest.raises(MalformedInput, match="not in F0"):
        torus_element(F, u, one)


@given(st.integers(-3, 3), st.integers(-3, 3))
def test_torus_weights(a, b):
    g = torus_element(F, T(a), T(b))
    assert g[1, 1] == T(a + b) and g[6, 6] == T(-a - b)
    for i, (w1, w2) in enumerate(TORUS_WEIGHTS):
        assert g[i, i] == T(w1 * a + w2 * b)


# -- derivations ---------------------------------------------------------------------

def _is_derivation(f, D):
    def apply(v):
        return [sum((f.mul(D[r][c], v[c]) for c in range(8)), 0) % f.p for r in range(8)]
    for i in range(8):
        for j in range(8):
            ei = [int(k == i) for k in range(8)]
            ej = [int(k == j) for k in range(8)]
            lhs = apply(_star(ei, ej, f.p))
            rhs = [(a + b) % f.p for a, b in zip(_star(apply(ei), ej, f.p), _star(ei, apply(ej), f.p))]
            if lhs != rhs:
                return False
    return True


def _star(x, y, p):
    out = [0] * 8
    for i, j, k, s in algebra.STRUCTURE:
        out[k] = (out[k] + s * x[i] * y[j]) % p
    return out


@pytest.mark.parametrize("p", [7, 13])
def test_derivation_basis(p):
    f = make_field(p)
    basis = derivation_basis(f)
    assert len(basis) == 14
    G = algebra.derive_gram()
    for D in basis:
        assert _is_derivation(f, D)
        # skew for the form
        for a in range(8):
            for b in range(8):
                s = sum(D[c][a] * G[c][b] + G[a][c] * D[c][b] for c in range(8))
                assert s % p == 0


def test_root_spaces(roots):
    assert len(roots) == 12 and all(len(v) == 1 for v in roots.values())
    for w, (D,) in roots.items():
        assert nilpotency_index(F, D) <= 3


def test_exp_examples(roots):
    Z = [[0] * 8 for _ in range(8)]
    assert exp_nilpotent(F, Z).agrees(I8)
    D = roots[sorted(roots)[0]][0]
    g = exp_nilpotent(F, D, t)
    h = exp_nilpotent(F, [[(-x) % 7 for x in r] for r in D], t)
    assert (g @ h).agrees(I8)
    gp = exp_nilpotent(F, D, ti)
    assert gp.min_valuation() < 0 and is_member(gp)
    with pytest.raises(MalformedInput, match="not in F0"):
        exp_nilpotent(F, D, u)


def test_exp_rejects_non_nilpotent():
    D = [[int(i == j) for j in range(8)] for i in range(8)]
    with pytest.raises(MathFailure, match="not nilpotent"):
        exp_nilpotent(F, D)


@settings(max_examples=10)
@given(st.integers(0, 10 ** 6), st.integers(-2, 2))
def test_exponentials_are_members(seed, m):
    rng = np.random.default_rng(seed)
    _, D, nu = sample_nilpotent(F, rng)
    assert is_member(exp_nilpotent(F, D, T(m), verify=False))


# -- random words -----------------------------------------------------------------------

def test_random_word_examples():
    assert random_group_element(F, 0, 0).agrees(I8)
    for s in range(5):
        g = random_group_element(F, s, 6, 2)
        vals = [x.valuation for x in g.entries() if not x.is_zero()]
        # t-units: u-exponents within [-36, 36]
        assert -36 <= min(vals) and max(vals) <= 36


@settings(max_examples=6)
@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
def test_membership_closure(s1, s2):
    g = random_group_element(F, s1, 3, 1)
    h = random_group_element(F, s2, 3, 1)
    assert is_member(g @ h)
    gi = inverse(g, 40)
    assert is_member(gi.truncate(40 + gi.min_valuation()), 16)


# -- triples and the lift -------------------------------------------------------------------

def test_triple_examples():
    g = random_group_element(F, 3, 4, 2)
    assert check_triple(g, g, g)
    tri = (g, torus_element(F, t, one), I8)
    assert rotate_triple(rotate_triple(rotate_triple(tri))) == tri
    res = triality_lift(diag_end(2))
    g2, g3 = res.pair()
    assert check_triple(diag_end(2), g2, g3)
    assert not check_triple(diag_end(2), -g2, g3)


def test_fixed_triple_is_rotation_invariant():
    g = random_group_element(F, 8, 3, 2)
    assert rotate_triple((g, g, g)) == (g, g, g) and check_triple(g, g, g)


def test_lift_identity():
    res = triality_lift(I8)
    g2, g3 = res.pair()
    assert g2.agrees(I8) and g3.agrees(I8)
    assert check_triple(I8, *res.pair(-1))


def test_lift_member():
    g = random_group_element(F, 2, 3, 1)
    g2, g3 = triality_lift(g).pair()
    assert (g2.agrees(g) and g3.agrees(g)) or ((-g2).agrees(g) and (-g3).agrees(g))


def test_lift_non_multiplicative_isometry():
    g1 = diag_end(2)
    res = triality_lift(g1)
    for s in (1, -1):
        assert check_triple(g1, *res.pair(s), N=24)
    g2, g3 = res.pair()
    # scalings other than the sign break the triple
    for lam in (LaurentJet.const(F, 2), t):
        assert not check_triple(g1, g2.scale(lam), g3.scale(lam))


def test_lift_spinor_obstruction():
    with pytest.raises(MathFailure, match="no lift over base field") as exc:
        triality_lift(diag_end(1))
    assert "spinor" in exc.value.info["reason"]


def test_lift_needs_proper_isometry():
    with pytest.raises(MalformedInput):
        triality_lift(JetMatrix.diag(F, [t] + [one] * 7))
