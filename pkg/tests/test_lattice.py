import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trikit import algebra
from trikit.errors import MathFailure
from trikit.field import make_field
from trikit.group import random_group_element, torus_element
from trikit.lattice import (Lattice, check_all, check_closed, check_parunit, check_self_dual, find_witness,
                            lattice_equal, residue_algebra, residue_witnesses)
from trikit.linalg import JetMatrix
from trikit.pipelines import negative_fixtures, parunit_failure_witness
from trikit.series import LaurentJet

from oracles import first_residue_witness, parsed_table

F = make_field(7)
N = 24
u = LaurentJet.monomial(F, 1, 1)
ui = LaurentJet.monomial(F, 1, -1)
one = LaurentJet.one(F)
t = LaurentJet.monomial(F, 1, 3)
STD = Lattice.standard(F, N)


def e(i):
    return algebra.AlgebraElement.basis(F, i)


def diag(*d):
    return Lattice(JetMatrix.diag(F, list(d)), N)


_FIXTURES = []


def fixtures():
    if not _FIXTURES:
        _FIXTURES.extend(negative_fixtures(F, N))
    return list(_FIXTURES)


def torus_image():
    return STD.transform(torus_element(F, t * t, t))


# -- lattice_equal ------------------------------------------------------------

def test_lattice_equal_examples():
    cols = STD.basis.columns()
    perm = Lattice(JetMatrix.from_columns(F, cols[::-1]), N)
    assert lattice_equal(STD, perm)
    assert not lattice_equal(STD, diag(u, *[1] * 7))
    assert lattice_equal(STD, Lattice(STD.basis.scale(one + u), N))


# -- conditions (1), (2) ---------------------------------------------------------

def test_self_dual_examples():
    assert check_self_dual(STD)[0]
    ok, info = check_self_dual(diag(u, *[1] * 7))
    assert not ok and info["det_valuation"] == 1 and info["gram_det_valuation"] == 2
    assert check_self_dual(torus_image())[0]


def test_closed_examples():
    assert check_closed(STD)[0]
    ok, info = check_closed(diag(u, *[1] * 6, ui))
    assert not ok and info["pair"] == [2, 3]
    # e2 * e3 = e1, which lies outside the lattice
    assert info["product"][0] == {"prec": None, "coeffs": {"0": 1}}
    assert check_closed(torus_image())[0]


# -- condition (3) ---------------------------------------------------------------

def test_witness_examples():
    a, c, info = find_witness(STD, e(4))
    assert info["source"] == "provided"
    with pytest.raises(MathFailure, match=r"<a\*a,a> != 1"):
        find_witness(STD, e(1))
    g = torus_element(F, t * t, t)
    find_witness(torus_image(), g.column(3))
    with pytest.raises(MathFailure, match="not in lattice"):
        find_witness(diag(u, *[1] * 7), e(1))


def test_first_residue_witness_matches_brute_force():
    G = algebra.derive_gram()
    want = first_residue_witness(parsed_table(), G, 7)
    ca = STD.coord_algebra(N)
    got = next(residue_witnesses(ca))
    assert [int(x) for x in got] == want == [0, 0, 0, 1, 0, 0, 0, 0]


def test_search_finds_e4_on_standard_lattice():
    rep = check_all(STD)
    assert rep.passed
    assert rep.conditions[3]["source"] == "search"
    assert algebra.AlgebraElement(rep.witness) == e(4)


# -- residue algebra and condition (4) -------------------------------------------

def _table_consts():
    C = [[[0] * 8 for _ in range(8)] for _ in range(8)]
    for i, j, k, s in algebra.STRUCTURE:
        C[i][j][k] = s % 7
    return C


def test_residue_algebra_reproduces_table():
    R = residue_algebra(STD)
    assert [[[int(v) for v in r] for r in row] for row in R.consts] == _table_consts()
    assert [[int(v) % 7 for v in r] for r in R.gram] == [[g % 7 for g in r] for r in algebra.derive_gram()]
    R2 = residue_algebra(diag(one + u, *[1] * 7))
    assert [[[int(v) for v in r] for r in row] for row in R2.consts] == _table_consts()
    with pytest.raises(MathFailure):
        residue_algebra(diag(u, *[1] * 6, ui))


def test_parunit_examples():
    ok, info = check_parunit(STD, e(4).coords)
    assert ok and info["complement_dim"] == 7
    g = torus_element(F, t * t, t)
    L = STD.transform(g)
    assert check_all(L, g.column(3)).passed


def test_parunit_failure_fixture():
    a, res = parunit_failure_witness(F, N)
    # twice e4: q = 0 and <a*a, a> = 8 = 1 mod 7, yet the residue is no para-unit
    assert a == e(4) * LaurentJet.const(F, 2)
    rep = check_all(STD, a)
    assert rep.failed == 4 and rep.conditions[3]["verdict"]


def test_check_all_examples():
    assert check_all(STD, e(4)).passed
    assert check_all(diag(u, *[1] * 7), e(4)).failed == 1
    rep = check_all(diag(u, *[1] * 6, ui), e(4))
    assert rep.failed == 2 and rep.conditions[1]["verdict"]


def test_negative_fixtures_fail_where_designed():
    for name, L, w, want in fixtures():
        rep = check_all(L, w, N)
        assert rep.failed == want, name
        assert all(rep.conditions[k]["verdict"] for k in range(1, want))


def test_report_json():
    rep = check_all(diag(u, *[1] * 6, ui), e(4)).to_json()
    assert rep["condition"] == 2 and rep["pair"] == [2, 3]


def test_lattice_file_roundtrip():
    L = torus_image()
    obj = L.to_json()
    assert len(obj["basis"]) == 8 and obj["field"] == {"type": "prime", "p": 7, "xi": 2}
    assert lattice_equal(Lattice.from_json(obj), L)


# -- properties ---------------------------------------------------------------------

word_seeds = st.integers(0, 10 ** 6)


@settings(max_examples=8)
@given(word_seeds)
def test_orbit_stability_and_witness_transport(seed):
    g = random_group_element(F, seed, 3, 2)
    L = STD.transform(g)
    rep = check_all(L, g.column(3))
    assert rep.passed


def _random_unimodular(rng):
    # unit upper triangular times a unit diagonal, then a column permutation
    M = [[LaurentJet.zero(F)] * 8 for _ in range(8)]
    for i in range(8):
        M[i][i] = LaurentJet.from_dict(F, {0: int(rng.integers(1, 7)), 1: int(rng.integers(7))})
        for j in range(i + 1, 8):
            M[i][j] = LaurentJet.from_dict(F, {k: int(rng.integers(7)) for k in range(3)})
    perm = rng.permutation(8)
    return JetMatrix(F, [[M[i][perm[j]] for j in range(8)] for i in range(8)])


@settings(max_examples=6)
@given(st.integers(0, 10 ** 6))
def test_basis_independence(seed):
    rng = np.random.default_rng(seed)
    U = _random_unimodular(rng)
    cases = fixtures() + [("standard", STD, e(4), None), ("torus", torus_image(),
                                                                          torus_element(F, t * t, t).column(3), None)]
    for name, L, w, want in cases:
        L2 = Lattice(L.basis @ U, N)
        assert lattice_equal(L, L2)
        r1, r2 = check_all(L, w), check_all(L2, w)
        assert (r1.passed, r1.failed) == (r2.passed, r2.failed), name
