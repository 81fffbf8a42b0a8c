import pytest
from hypothesis import assume, given, strategies as st

from trikit.errors import IndeterminateValuation, MalformedInput, PrecisionError
from trikit.field import make_field
from trikit.series import LaurentJet, jet

from oracles import poly_mul_mod

F = make_field(7)
u = LaurentJet.monomial(F, 1, 1)
one = LaurentJet.one(F)

polys = st.dictionaries(st.integers(-4, 6), st.integers(0, 6), max_size=6)
precs = st.one_of(st.none(), st.integers(-2, 14))


def J(d, prec=None):
    return LaurentJet.from_dict(F, d, prec)


def as_dict(x):
    return {k: int(v.raw) for k, v in x.coeffs.items()}


def test_examples():
    assert (one + u) * (one - u) == one - u * u
    assert ((one + u) * (one - u)).prec is None
    assert LaurentJet.monomial(F, 1, -1) * u == one
    s = J({2: 1}, 5) + J({4: 1}, 6)
    assert s.prec == 5 and as_dict(s) == {2: 1, 4: 1}


def test_invert_examples():
    inv = (one + u).invert_unit(10)
    assert as_dict(inv) == {n: (-1) ** n % 7 for n in range(10)} and inv.prec == 10
    assert LaurentJet.monomial(F, 1, 3).invert_unit() == LaurentJet.monomial(F, 1, -3)
    with pytest.raises(IndeterminateValuation, match="indeterminate valuation"):
        LaurentJet.zero(F, 8).invert_unit()


def test_galois_examples():
    assert u.rho() == LaurentJet.monomial(F, 2, 1)
    t = LaurentJet.monomial(F, 1, 3)
    assert t.rho() == t
    assert as_dict(LaurentJet.monomial(F, 1, -1).rho()) == {-1: 4}
    assert u.theta() == u.rho().rho()


def test_residue_and_integrality():
    assert jet(F, {0: 3, 1: 1}).residue() == 3
    assert u.residue() == 0
    with pytest.raises(MalformedInput, match="not integral"):
        LaurentJet.monomial(F, 1, -1).residue()
    assert jet(F, {2: 1, 0: 5}).is_integral()
    assert not jet(F, {-1: 1, 0: 1}).is_integral()
    assert not u.is_unit_integral()
    with pytest.raises(PrecisionError):
        LaurentJet.zero(F, -1).is_integral()


def test_valuation_needs_a_known_coefficient():
    assert jet(F, {3: 2, 5: 1}).valuation == 3
    with pytest.raises(IndeterminateValuation):
        LaurentJet.zero(F, 4).valuation


def test_coeff_beyond_precision():
    with pytest.raises(PrecisionError):
        J({0: 1}, 3).coeff(3)


def test_json_roundtrip():
    x = J({-2: 3, 0: 1, 5: 6}, 24)
    obj = x.to_json()
    assert obj == {"prec": 24, "coeffs": {"-2": 3, "0": 1, "5": 6}}
    assert LaurentJet.from_json(F, obj) == x
    with pytest.raises(MalformedInput):
        LaurentJet.from_json(F, {"prec": "x", "coeffs": {}})


def test_sqrt():
    t = LaurentJet.monomial(F, 1, 3)
    assert t.sqrt() is None                      # odd valuation
    assert LaurentJet.const(F, 3).sqrt() is None   # 3 is not a square mod 7
    x = jet(F, {2: 2, 3: 1, 5: 4})
    r = x.sqrt(12)
    assert (r * r - x).truncate(2 + 12).is_zero()


@given(polys, polys)
def test_mul_matches_naive_convolution(a, b):
    assert as_dict(J(a) * J(b)) == poly_mul_mod(a, b, 7)


@given(polys, precs, polys, precs)
def test_precision_min_rule(a, pa, b, pb):
    x, y = J(a, pa), J(b, pb)
    s = x + y
    if pa is None and pb is None:
        assert s.prec is None
    else:
        assert s.prec == min(p for p in (pa, pb) if p is not None)
    m = x * y
    if pa is None and pb is None:
        assert m.prec is None
    # every stored exponent is below the precision
    for z in (s, m):
        if z.prec is not None:
            assert z.end <= z.prec or z.is_zero()


@given(polys, precs, polys, precs)
def test_rho_is_a_ring_morphism(a, pa, b, pb):
    x, y = J(a, pa), J(b, pb)
    assert (x * y).rho() == x.rho() * y.rho()
    assert (x + y).rho() == x.rho() + y.rho()
    assert x.rho().rho().rho() == x


@given(polys)
def test_fixed_ring(a):
    x = J(a)
    fixed = all(e % 3 == 0 for e, c in a.items() if c % 7)
    assert x.is_rho_fixed() == fixed
    assert (x.rho() == x) == fixed


@given(polys)
def test_norm_lies_in_fixed_ring(a):
    x = J(a)
    n = x * x.rho() * x.theta()
    assert all(e % 3 == 0 for e in n.coeffs)


@given(polys, st.integers(1, 16))
def test_invert_unit(a, m):
    x = J(a)
    assume(not x.is_zero())
    y = x.invert_unit(m)
    assert y.valuation == -x.valuation
    assert (x * y - one).is_zero()


@given(polys, st.integers(0, 10), st.integers(0, 10))
def test_truncation_is_consistent(a, n1, n2):
    # precision honesty: a coarser view never disagrees with a finer one
    lo, hi = sorted((n1, n2))
    x = J(a)
    assert x.truncate(lo) == x.truncate(hi).truncate(lo)
    assert x.truncate(hi) == x


def test_q_omega_backend():
    Q = make_field("q-omega")
    v = LaurentJet.monomial(Q, 1, 1)
    w = Q.xi
    assert v.rho() == LaurentJet.monomial(Q, w.raw, 1)
    assert (v * v.rho() * v.theta()) == LaurentJet.monomial(Q, 1, 3)
