"""The split para-Cayley product, its bilinear form and the twisted product.

Elements of V are sequences of 8 jets (coordinates in e1..e8).  Functions
accept plain lists or :class:`AlgebraElement`; they return lists unless
stated otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .errors import MathFailure
from .field import Field
from .series import DEFAULT_PREC, LaurentJet

__all__ = [
    "TABLE", "STRUCTURE", "AlgebraElement", "basis_vector", "star", "twisted_mul",
    "derive_gram", "gram_entries", "bilinear", "quadratic", "trace_form",
    "conjugate", "mul_operator", "apply_operator", "validate_axioms", "AxiomReport",
]

# Row i, column j holds s with e_i * e_j = sign(s) e_|s| (1-based), 0 for zero.
TABLE = (
    (0, 0, 0, -1, 0, -2, 3, -4),
    (0, 0, 1, 0, -2, 0, -5, -6),
    (0, -1, 0, 0, -3, -5, 0, 7),
    (0, -2, -3, 5, 0, 0, 0, -8),
    (-1, 0, 0, 0, 4, -6, -7, 0),
    (2, 0, -4, -6, 0, 0, -8, 0),
    (-3, -4, 0, -7, 0, 8, 0, 0),
    (-5, 6, -7, 0, -8, 0, 0, 0),
)

# (i, j, k, sign), 0-based, for every nonzero table entry
STRUCTURE = tuple(
    (i, j, abs(s) - 1, 1 if s > 0 else -1)
    for i, row in enumerate(TABLE) for j, s in enumerate(row) if s
)


def _coords(x):
    return x.coords if isinstance(x, AlgebraElement) else x


def basis_vector(field: Field, i: int, scale: LaurentJet | None = None):
    """e_{i+1} (0-based index), optionally times a jet."""
    z = LaurentJet.zero(field)
    v = [z] * 8
    v[i] = LaurentJet.one(field) if scale is None else scale
    return v


def _combine(field, terms):
    """Sum of signed jet products grouped by target coordinate."""
    out = [None] * 8
    for k, s, a, b in terms:
        t = a * b
        if s < 0:
            t = -t
        out[k] = t if out[k] is None else out[k] + t
    z = LaurentJet.zero(field)
    return [z if v is None else v for v in out]


def _live(v):
    return [not (a.prec is None and not len(a.c)) for a in v]


def star(x, y):
    """The para-Cayley product, extended F-bilinearly."""
    x, y = _coords(x), _coords(y)
    f = x[0].field
    lx, ly = _live(x), _live(y)
    return _combine(f, [(k, s, x[i], y[j]) for i, j, k, s in STRUCTURE if lx[i] and ly[j]])


def twisted_mul(x, y):
    """x*y = rho(x) star theta(y) coordinatewise."""
    x, y = _coords(x), _coords(y)
    return star([a.rho() for a in x], [a.theta() for a in y])


# ---------------------------------------------------------------------------
# Gram matrix, derived from x*(y*x) = q(x) y = (x*y)*x over the integers


def _int_star(x, y):
    out = [Fraction(0)] * 8
    for i, j, k, s in STRUCTURE:
        if x[i] and y[j]:
            out[k] += s * x[i] * y[j]
    return out


_GRAM_CACHE = None


def derive_gram():
    """Integer Gram matrix G with q(x) = x^T G x / 2, found by probing the table.

    For x = e_i and x = e_i + e_j the vector x*(e_k*x) and (x*e_k)*x must be a
    multiple q(x) e_k for every probe e_k.  Each probe yields one value for
    q(x) and seven vanishing conditions; all of them must agree.
    """
    global _GRAM_CACHE
    if _GRAM_CACHE is not None:
        return [list(r) for r in _GRAM_CACHE]
    unit = [[Fraction(int(a == b)) for b in range(8)] for a in range(8)]

    def q_of(x):
        vals = set()
        for k in range(8):
            for w in (_int_star(x, _int_star(unit[k], x)), _int_star(_int_star(x, unit[k]), x)):
                for m in range(8):
                    if m != k and w[m]:
                        raise MathFailure("inconsistent table", {"x": [str(c) for c in x], "probe": k})
                vals.add(w[k])
        if len(vals) != 1:
            raise MathFailure("inconsistent table", {"x": [str(c) for c in x], "values": sorted(map(str, vals))})
        return vals.pop()

    qd = [q_of(unit[i]) for i in range(8)]
    G = [[Fraction(0)] * 8 for _ in range(8)]
    for i in range(8):
        G[i][i] = 2 * qd[i]
        for j in range(i + 1, 8):
            x = [unit[i][m] + unit[j][m] for m in range(8)]
            G[i][j] = G[j][i] = q_of(x) - qd[i] - qd[j]
    # cross-check polarization on a few three-term vectors: q(x) = x^T G x / 2
    for i in range(8):
        for j in range(i + 1, 8):
            for k in range(j + 1, 8):
                x = [unit[i][m] + unit[j][m] - unit[k][m] for m in range(8)]
                lhs = q_of(x)
                rhs = sum(x[a] * G[a][b] * x[b] for a in range(8) for b in range(8)) / 2
                if lhs != rhs:
                    raise MathFailure("inconsistent table", {"polarization": [i, j, k]})
    if any(G[i][j].denominator != 1 for i in range(8) for j in range(8)):
        raise MathFailure("inconsistent table", {"reason": "non-integral Gram entry"})
    out = [[int(G[i][j]) for j in range(8)] for i in range(8)]
    if round(np.linalg.det(np.array(out, dtype=float))) == 0:
        raise MathFailure("inconsistent table", {"reason": "degenerate form"})
    _GRAM_CACHE = tuple(tuple(r) for r in out)
    return [list(r) for r in out]


def gram_entries():
    """Nonzero Gram entries as (i, j, value), 0-based."""
    G = derive_gram()
    return [(i, j, G[i][j]) for i in range(8) for j in range(8) if G[i][j]]


def bilinear(x, y):
    x, y = _coords(x), _coords(y)
    f = x[0].field
    acc = LaurentJet.zero(f)
    for i, j, g in gram_entries():
        t = x[i] * y[j]
        acc = acc + (t if g == 1 else t * g)
    return acc


def quadratic(x):
    x = _coords(x)
    f = x[0].field
    return bilinear(x, x).scale(f.inv(f.coerce(2)))


def trace_form(x):
    """T(x) = <x*x, x>."""
    return bilinear(twisted_mul(x, x), x)


def conjugate(x):
    """r(x) = <x, e> e - x with e = e4 + e5."""
    x = _coords(x)
    f = x[0].field
    e = [LaurentJet.zero(f)] * 8
    e[3] = e[4] = LaurentJet.one(f)
    c = bilinear(x, e)
    return [c * ei - xi for ei, xi in zip(e, x)]


def mul_operator(x, side: str = "left"):
    """Matrix M of y -> x*y (left) or y -> y*x (right).

    Convention: x*y = M theta(c) for left, y*x = M rho(c) for right, where c
    are the coordinates of y.
    """
    from .linalg import JetMatrix  # local import: linalg does not need algebra

    x = _coords(x)
    f = x[0].field
    z = LaurentJet.zero(f)
    M = [[z] * 8 for _ in range(8)]
    if side == "left":
        xr = [a.rho() for a in x]
        for i, j, k, s in STRUCTURE:
            M[k][j] = M[k][j] + (xr[i] if s > 0 else -xr[i])
    elif side == "right":
        xt = [a.theta() for a in x]
        for i, j, k, s in STRUCTURE:
            M[k][i] = M[k][i] + (xt[j] if s > 0 else -xt[j])
    else:
        raise ValueError("side must be 'left' or 'right'")
    return JetMatrix(f, M)


def apply_operator(M, y, side: str = "left"):
    y = _coords(y)
    return M @ [a.theta() if side == "left" else a.rho() for a in y]


# ---------------------------------------------------------------------------


class AlgebraElement:
    """An element of V: 8 jet coordinates in the basis e1..e8."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        coords = list(coords)
        if len(coords) != 8:
            raise ValueError("an algebra element has 8 coordinates")
        self.coords = coords

    @property
    def field(self):
        return self.coords[0].field

    @classmethod
    def basis(cls, field, i):
        """e_i with 1-based index, matching the table."""
        return cls(basis_vector(field, i - 1))

    @classmethod
    def zero(cls, field):
        return cls([LaurentJet.zero(field)] * 8)

    def __add__(self, other):
        return AlgebraElement([a + b for a, b in zip(self.coords, _coords(other))])

    def __sub__(self, other):
        return AlgebraElement([a - b for a, b in zip(self.coords, _coords(other))])

    def __neg__(self):
        return AlgebraElement([-a for a in self.coords])

    def __rmul__(self, lam):
        return AlgebraElement([a * lam for a in self.coords])

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return AlgebraElement(twisted_mul(self, other))
        return AlgebraElement([a * other for a in self.coords])

    def star(self, other):
        return AlgebraElement(star(self, other))

    def __eq__(self, other):
        return all((a - b).is_zero() for a, b in zip(self.coords, _coords(other)))

    __hash__ = None

    def q(self):
        return quadratic(self)

    def to_json(self):
        return [a.to_json() for a in self.coords]

    @classmethod
    def from_json(cls, field, obj):
        from .errors import MalformedInput

        if not isinstance(obj, list) or len(obj) != 8:
            raise MalformedInput("an algebra element is an array of 8 jets")
        return cls([LaurentJet.from_json(field, a) for a in obj])

    def __repr__(self):
        return "AlgebraElement(" + ", ".join(map(repr, self.coords)) + ")"


# ---------------------------------------------------------------------------
# identity validator


@dataclass
class AxiomReport:
    passed: bool
    samples: int
    checks: int = 0
    failure: dict | None = None
    identities: list = dc_field(default_factory=list)

    def to_json(self):
        return {"passed": self.passed, "samples": self.samples, "checks": self.checks,
                "identities": self.identities, "failure": self.failure}


def random_element(field: Field, rng, lo=-3, hi=3):
    """Random Laurent-polynomial element with exponents in [lo, hi]."""
    out = []
    for _ in range(8):
        d = {e: field.random(rng) for e in range(lo, hi + 1)}
        out.append(LaurentJet.from_dict(field, d))
    return out


def random_scalar(field: Field, rng, lo=-3, hi=3):
    return LaurentJet.from_dict(field, {e: field.random(rng) for e in range(lo, hi + 1)})


def _vec_zero(v):
    return all(a.is_zero() for a in v)


def _trunc(v, prec):
    return [a.truncate(prec) for a in v]


def _identities(x, y, z, w, lam):
    """Each identity as (name, residual) where residual is a jet or vector."""
    m, q, b = twisted_mul, quadratic, bilinear
    f = x[0].field

    def scal(c, v):
        return [c * a for a in v]

    def sub(a, b_):
        return [p - r for p, r in zip(a, b_)]

    def add(a, b_):
        return [p + r for p, r in zip(a, b_)]

    qx, qz = q(x), q(z)
    xy = m(x, y)
    xx = m(x, x)
    Tx = b(xx, x)
    yield "semilinear left", sub(m(scal(lam, x), y), scal(lam.rho(), xy))
    yield "semilinear right", sub(m(x, scal(lam, y)), scal(lam.theta(), xy))
    yield "norm multiplicative", q(xy) - qx.rho() * q(y).theta()
    s1, s2, s3 = b(xy, z), b(m(y, z), x), b(m(z, x), y)
    yield "cyclic form rho", s1 - s2.rho()
    yield "cyclic form theta", s1 - s3.theta()
    yield "form right-scaled", b(m(x, z), m(y, z)) - b(x, y).rho() * qz.theta()
    yield "form left-scaled", b(m(z, x), m(z, y)) - b(x, y).theta() * qz.rho()
    yield "form polarized", b(m(x, z), m(y, w)) + b(m(x, w), m(y, z)) - b(x, y).rho() * b(z, w).theta()
    yield "flexible left", sub(m(x, m(y, x)), scal(qx.rho(), y))
    yield "flexible right", sub(m(xy, x), scal(qx.theta(), y))
    yield "linearized flexible left", sub(add(m(x, m(y, z)), m(z, m(y, x))), scal(b(x, z).rho(), y))
    yield "linearized flexible right", sub(add(m(xy, z), m(m(z, y), x)), scal(b(x, z).theta(), y))
    yield "square of square", sub(m(xx, xx), sub(scal(Tx, x), scal(qx, xx)))
    yield "T rho-fixed", Tx - Tx.rho()
    del f


IDENTITY_NAMES = [
    "semilinear left", "semilinear right", "norm multiplicative", "cyclic form rho", "cyclic form theta",
    "form right-scaled", "form left-scaled", "form polarized", "flexible left", "flexible right",
    "linearized flexible left", "linearized flexible right", "square of square", "T rho-fixed",
]


class _Batch:
    """A batch of exact polynomials over F_p: array (..., L) of exponents off..off+L-1."""

    __slots__ = ("a", "off", "p", "xp")

    def __init__(self, a, off, p, xp):
        self.a, self.off, self.p, self.xp = a, off, p, xp

    def _align(self, o):
        lo = min(self.off, o.off)
        hi = max(self.off + self.a.shape[-1], o.off + o.a.shape[-1])

        def pad(b):
            w = [(0, 0)] * (b.a.ndim - 1) + [(b.off - lo, hi - b.off - b.a.shape[-1])]
            return np.pad(b.a, w)
        return pad(self), pad(o), lo

    def __add__(self, o):
        a, b, lo = self._align(o)
        return _Batch((a + b) % self.p, lo, self.p, self.xp)

    def __sub__(self, o):
        a, b, lo = self._align(o)
        return _Batch((a - b) % self.p, lo, self.p, self.xp)

    def __mul__(self, o):
        """Coefficientwise convolution, broadcasting over leading axes."""
        a, b = self.a, o.a
        if a.shape[-1] > b.shape[-1]:
            a, b = b, a
        lead = np.broadcast_shapes(a.shape[:-1], b.shape[:-1])
        out = np.zeros(lead + (a.shape[-1] + b.shape[-1] - 1,), dtype=np.int64)
        lb = b.shape[-1]
        for k in range(a.shape[-1]):
            out[..., k:k + lb] += a[..., k:k + 1] * b
        return _Batch(out % self.p, self.off + o.off, self.p, self.xp)

    def scale(self, c):
        return _Batch((self.a * c) % self.p, self.off, self.p, self.xp)

    def galois(self, power):
        e = (np.arange(self.off, self.off + self.a.shape[-1]) * power) % 3
        return _Batch((self.a * self.xp[e]) % self.p, self.off, self.p, self.xp)

    def take(self, idx, axis=1):
        return _Batch(np.take(self.a, idx, axis=axis), self.off, self.p, self.xp)

    def expand(self):
        """Scalar batch (S, L) -> (S, 1, L) for broadcasting against vectors."""
        return _Batch(self.a[:, None, :], self.off, self.p, self.xp)

    def nonzero_rows(self):
        return np.any(self.a.reshape(self.a.shape[0], -1) != 0, axis=1)


_I = np.array([i for i, _, _, _ in STRUCTURE])
_J = np.array([j for _, j, _, _ in STRUCTURE])
_SIGN = np.zeros((len(STRUCTURE), 8), dtype=np.int64)
for _n, (_i, _j, _k, _s) in enumerate(STRUCTURE):
    _SIGN[_n, _k] = _s


class _BatchAlgebra:
    def __init__(self, p):
        g = gram_entries()
        self.gi = np.array([i for i, _, _ in g])
        self.gj = np.array([j for _, j, _ in g])
        self.gv = np.array([v for _, _, v in g], dtype=np.int64)
        self.inv2 = pow(2, p - 2, p)
        self.p = p

    def m(self, x, y):
        prod = x.galois(1).take(_I) * y.galois(2).take(_J)
        out = np.einsum("spl,pk->skl", prod.a, _SIGN) % self.p
        return _Batch(out, prod.off, self.p, x.xp)

    def b(self, x, y):
        prod = x.take(self.gi) * y.take(self.gj)
        out = np.einsum("spl,p->sl", prod.a, self.gv) % self.p
        return _Batch(out, prod.off, self.p, x.xp)

    def q(self, x):
        return self.b(x, x).scale(self.inv2)

    @staticmethod
    def sv(c, v):
        return c.expand() * v


def _batch_identities(A: _BatchAlgebra, x, y, z, w, lam):
    m, q, b, sv = A.m, A.q, A.b, A.sv
    qx, qz = q(x), q(z)
    xy, xx = m(x, y), m(x, x)
    Tx = b(xx, x)
    yield "semilinear left", m(sv(lam, x), y) - sv(lam.galois(1), xy)
    yield "semilinear right", m(x, sv(lam, y)) - sv(lam.galois(2), xy)
    yield "norm multiplicative", q(xy) - qx.galois(1) * q(y).galois(2)
    s1, s2, s3 = b(xy, z), b(m(y, z), x), b(m(z, x), y)
    yield "cyclic form rho", s1 - s2.galois(1)
    yield "cyclic form theta", s1 - s3.galois(2)
    yield "form right-scaled", b(m(x, z), m(y, z)) - b(x, y).galois(1) * qz.galois(2)
    yield "form left-scaled", b(m(z, x), m(z, y)) - b(x, y).galois(2) * qz.galois(1)
    yield "form polarized", b(m(x, z), m(y, w)) + b(m(x, w), m(y, z)) - b(x, y).galois(1) * b(z, w).galois(2)
    yield "flexible left", m(x, m(y, x)) - sv(qx.galois(1), y)
    yield "flexible right", m(xy, x) - sv(qx.galois(2), y)
    yield "linearized flexible left", m(x, m(y, z)) + m(z, m(y, x)) - sv(b(x, z).galois(1), y)
    yield "linearized flexible right", m(xy, z) + m(m(z, y), x) - sv(b(x, z).galois(2), y)
    yield "square of square", m(xx, xx) - (sv(Tx, x) - sv(qx, xx))
    yield "T rho-fixed", Tx - Tx.galois(1)


def _validate_prime(field: Field, samples, seed, prec):
    p = field.p
    rng = np.random.default_rng(seed)
    lo, hi = -3, 3
    width = hi - lo + 1
    raw = rng.integers(0, p, size=(samples, 4, 8, width), dtype=np.int64)
    lraw = rng.integers(0, p, size=(samples, width), dtype=np.int64)
    xp = np.array([int(v) for v in field.xi_pows], dtype=np.int64)
    A = _BatchAlgebra(p)
    x, y, z, w = (_Batch(raw[:, i], lo, p, xp) for i in range(4))
    lam = _Batch(lraw, lo, p, xp)
    checks = 0
    for name, res in _batch_identities(A, x, y, z, w, lam):
        # inputs are exact polynomials: residuals must vanish identically,
        # which in particular certifies them below any precision
        bad = np.flatnonzero(res.nonzero_rows())
        if len(bad):
            n = int(bad[0])

            def jets(arr):
                return [LaurentJet.from_array(field, lo, arr[k]).to_json() for k in range(8)]
            wit = {"x": jets(raw[n, 0]), "y": jets(raw[n, 1]), "z": jets(raw[n, 2]), "w": jets(raw[n, 3]),
                   "lambda": LaurentJet.from_array(field, lo, lraw[n]).to_json()}
            return AxiomReport(False, samples, checks + n + 1,
                               {"identity": name, "sample": n, "witnesses": wit}, IDENTITY_NAMES)
        checks += samples
    return AxiomReport(True, samples, checks, None, IDENTITY_NAMES)


def validate_axioms(field: Field, samples: int = 1000, seed: int = 42,
                    prec: int = DEFAULT_PREC, batched: bool | None = None) -> AxiomReport:
    """Check every twisted-composition identity on random samples.

    Samples are Laurent polynomials with exponents in [-3, 3] drawn from
    ``numpy.random.default_rng(seed)``.  Over F_p the whole batch is evaluated
    as exact polynomials with numpy; otherwise (or with ``batched=False``)
    inputs are cut to ``prec`` and compared on their known range.
    """
    if samples <= 0:
        return AxiomReport(True, 0, 0, None, IDENTITY_NAMES)
    if batched is None:
        batched = field.kind == "prime" and field.p < 2 ** 20
    if batched:
        return _validate_prime(field, samples, seed, prec)
    rng = np.random.default_rng(seed)
    checks = 0
    for n in range(samples):
        x, y, z, w = (_trunc(random_element(field, rng), prec) for _ in range(4))
        lam = random_scalar(field, rng).truncate(prec)
        for name, res in _identities(x, y, z, w, lam):
            checks += 1
            ok = res.is_zero() if isinstance(res, LaurentJet) else _vec_zero(res)
            if not ok:
                wit = {"x": [a.to_json() for a in x], "y": [a.to_json() for a in y],
                       "z": [a.to_json() for a in z], "w": [a.to_json() for a in w],
                       "lambda": lam.to_json()}
                return AxiomReport(False, n + 1, checks, {"identity": name, "sample": n, "witnesses": wit},
                                   IDENTITY_NAMES)
    return AxiomReport(True, samples, checks, None, IDENTITY_NAMES)
