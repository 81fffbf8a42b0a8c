"""Exact coefficient fields containing a primitive cube root of unity.

Two backends are provided:

* ``prime``   -- the prime field F_p with p = 1 (mod 3); elements are ints in [0, p).
* ``q-omega`` -- the cyclotomic field Q(w), w^2 + w + 1 = 0; elements are
  :class:`QOmega` pairs of rationals in the basis {1, w}.

Series code works with *raw* values (ints or QOmega) for speed and exposes
:class:`FieldElement` at the public boundary.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import MalformedInput

__all__ = ["Field", "FieldElement", "QOmega", "make_field"]


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


def _rational_sqrt(x: Fraction):
    if x < 0:
        return None
    a, b = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if a * a == x.numerator and b * b == x.denominator:
        return Fraction(a, b)
    return None


class QOmega:
    """a + b*w with rational a, b and w a primitive cube root of unity."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = Fraction(a)
        self.b = Fraction(b)

    @staticmethod
    def _lift(other):
        if isinstance(other, QOmega):
            return other
        if isinstance(other, (int, Fraction)):
            return QOmega(other, 0)
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return QOmega(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return QOmega(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return self._lift(other) - self

    def __neg__(self):
        return QOmega(-self.a, -self.b)

    def __mul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        # w^2 = -1 - w
        bd = self.b * o.b
        return QOmega(self.a * o.a - bd, self.a * o.b + self.b * o.a - bd)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.a * self.a - self.a * self.b + self.b * self.b

    def conj(self) -> "QOmega":
        # w -> w^2 = -1 - w
        return QOmega(self.a - self.b, -self.b)

    def inverse(self) -> "QOmega":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero")
        c = self.conj()
        return QOmega(c.a / n, c.b / n)

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __eq__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return False
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __repr__(self):
        return f"QOmega({self.a}, {self.b})"

    def __str__(self):
        if not self.b:
            return str(self.a)
        return f"({self.a}{'+' if self.b >= 0 else '-'}{abs(self.b)}w)"


class Field:
    """A coefficient field; compare by value, safe to share."""

    def __init__(self, kind: str, p: int | None = None):
        if kind == "prime":
            if p is None or not isinstance(p, int) or isinstance(p, bool):
                raise MalformedInput("prime backend needs an integer p")
            if p in (2, 3):
                raise MalformedInput(f"characteristic {p} is excluded (need char not in {{2, 3}})")
            if not _is_prime(p):
                raise MalformedInput(f"{p} is not prime")
            if p % 3 != 1:
                raise MalformedInput(f"no primitive cube root of unity in F_{p}")
            self.kind, self.p = kind, p
            self.zero, self.one = 0, 1
            self._xi = next(x for x in range(2, p) if pow(x, 3, p) == 1)
            # int64 convolutions must not overflow; fall back to Python ints otherwise
            self.dtype = np.int64 if p < (1 << 20) else object
        elif kind == "q-omega":
            self.kind, self.p = kind, None
            self.zero, self.one = QOmega(0), QOmega(1)
            self._xi = QOmega(0, 1)
            self.dtype = object
        else:
            raise MalformedInput(f"unknown field type {kind!r}")
        self.char = self.p if self.p else 0
        self.xi_pows = (self.one, self._xi, self.mul(self._xi, self._xi))

    # -- identity -------------------------------------------------------
    def __eq__(self, other):
        return isinstance(other, Field) and (self.kind, self.p) == (other.kind, other.p)

    def __hash__(self):
        return hash((self.kind, self.p))

    def __repr__(self):
        return f"Field(prime, p={self.p})" if self.kind == "prime" else "Field(q-omega)"

    def to_json(self) -> dict:
        if self.kind == "prime":
            return {"type": "prime", "p": self.p, "xi": self._xi}
        return {"type": "q-omega"}

    @property
    def xi(self) -> "FieldElement":
        return FieldElement(self, self._xi)

    def __call__(self, value) -> "FieldElement":
        return FieldElement(self, self.coerce(value))

    # -- raw scalar arithmetic -------------------------------------------
    def coerce(self, value):
        if isinstance(value, FieldElement):
            if value.field != self:
                raise MalformedInput("mixing elements of different fields")
            return value.raw
        if self.kind == "prime":
            if isinstance(value, Fraction):
                return value.numerator * pow(value.denominator, -1, self.p) % self.p
            return int(value) % self.p
        if isinstance(value, QOmega):
            return value
        return QOmega(value)

    def add(self, a, b):
        return (a + b) % self.p if self.p else a + b

    def sub(self, a, b):
        return (a - b) % self.p if self.p else a - b

    def neg(self, a):
        return (-a) % self.p if self.p else -a

    def mul(self, a, b):
        return (a * b) % self.p if self.p else a * b

    def inv(self, a):
        if not a:
            raise ZeroDivisionError("division by zero")
        if self.p:
            return pow(int(a), -1, self.p)
        return a.inverse()

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a) -> bool:
        return not a

    def xi_pow(self, n: int):
        return self.xi_pows[n % 3]

    def sqrt(self, a):
        """A square root of ``a`` in the field, or None if ``a`` is a non-square."""
        if not a:
            return self.zero
        if self.p:
            p = self.p
            a = int(a) % p
            if pow(a, (p - 1) // 2, p) != 1:
                return None
            if p < 100000:
                return next(x for x in range(1, p) if x * x % p == a)
            return _tonelli(a, p)
        # Q(w): w = (z + n)/s with n = sqrt(N(z)), s^2 = Tr(z) + 2n
        n = _rational_sqrt(a.norm())
        if n is None:
            return None
        tr = 2 * a.a - a.b
        s = _rational_sqrt(tr + 2 * n)
        if s is not None and s != 0:
            w = QOmega((a.a + n) / s, a.b / s)
            return w if w * w == a else None
        # s = 0: w is a rational multiple of sqrt(-3) = 1 + 2w
        if a.b == 0:
            d = _rational_sqrt(-a.a / 3)
            if d is not None:
                return QOmega(d, 2 * d)
        return None

    def canonical_sign(self, a) -> int:
        """+1 if ``a`` is the preferred representative of {a, -a}, else -1."""
        if self.p:
            return 1 if int(a) % self.p <= self.p // 2 else -1
        return 1 if (a.a, a.b) > (0, 0) or (a.a == 0 and a.b >= 0) else -1

    def elements(self):
        if not self.p:
            raise MalformedInput("q-omega is infinite; enumeration needs the prime backend")
        return range(self.p)

    def random(self, rng):
        if self.p:
            return int(rng.integers(0, self.p))
        return QOmega(Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4))),
                      Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4))))

    def raw_to_json(self, a):
        if self.p:
            return int(a)
        if a.b == 0 and a.a.denominator == 1:
            return int(a.a)
        return [str(a.a), str(a.b)]

    def raw_from_json(self, v):
        if self.p:
            if not isinstance(v, int) or isinstance(v, bool):
                raise MalformedInput(f"expected integer coefficient, got {v!r}")
            return v % self.p
        if isinstance(v, list):
            return QOmega(Fraction(v[0]), Fraction(v[1]))
        return QOmega(Fraction(v))

    # -- array helpers ---------------------------------------------------
    def array(self, values) -> np.ndarray:
        if self.dtype is object:
            out = np.empty(len(values), dtype=object)
            out[:] = [self.coerce(v) for v in values] if self.kind == "q-omega" else [int(v) % self.p for v in values]
            return out
        return np.asarray(values, dtype=np.int64) % self.p

    def zeros(self, n: int) -> np.ndarray:
        if self.dtype is object:
            out = np.empty(n, dtype=object)
            out[:] = [self.zero] * n
            return out
        return np.zeros(n, dtype=np.int64)

    def reduce(self, arr: np.ndarray) -> np.ndarray:
        return arr % self.p if self.p else arr

    def conv(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.reduce(np.convolve(a, b))


def _tonelli(a: int, p: int) -> int:
    q, s = p - 1, 0
    while q % 2 == 0:
        q, s = q // 2, s + 1
    z = next(z for z in range(2, p) if pow(z, (p - 1) // 2, p) == p - 1)
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, tt = 0, t
        while tt != 1:
            tt, i = tt * tt % p, i + 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


class FieldElement:
    """Immutable element of a :class:`Field`."""

    __slots__ = ("field", "raw")

    def __init__(self, field: Field, raw):
        self.field = field
        self.raw = raw

    def _other(self, other):
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise MalformedInput("mixing elements of different fields")
            return other.raw
        if isinstance(other, (int, Fraction, QOmega)):
            return self.field.coerce(other)
        return None

    def __add__(self, other):
        o = self._other(other)
        return NotImplemented if o is None else FieldElement(self.field, self.field.add(self.raw, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return NotImplemented if o is None else FieldElement(self.field, self.field.sub(self.raw, o))

    def __rsub__(self, other):
        o = self._other(other)
        return NotImplemented if o is None else FieldElement(self.field, self.field.sub(o, self.raw))

    def __mul__(self, other):
        o = self._other(other)
        return NotImplemented if o is None else FieldElement(self.field, self.field.mul(self.raw, o))

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.raw))

    def inv(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv(self.raw))

    def __truediv__(self, other):
        o = self._other(other)
        return NotImplemented if o is None else FieldElement(self.field, self.field.div(self.raw, o))

    def __pow__(self, n: int):
        if n < 0:
            return self.inv() ** (-n)
        r = self.field.one
        for _ in range(n):
            r = self.field.mul(r, self.raw)
        return FieldElement(self.field, r)

    def __eq__(self, other):
        o = self._other(other)
        return o is not None and self.raw == o

    def __hash__(self):
        return hash((self.field, self.raw))

    def __bool__(self):
        return bool(self.raw)

    def __repr__(self):
        return f"{self.raw}"


@lru_cache(maxsize=None)
def _cached(kind, p):
    return Field(kind, p)


def make_field(spec) -> Field:
    """Build a field from ``7``, ``"q-omega"`` or a JSON dict like ``{"type": "prime", "p": 7}``."""
    if isinstance(spec, Field):
        return spec
    if isinstance(spec, bool):
        raise MalformedInput(f"bad field spec {spec!r}")
    if isinstance(spec, int):
        return _cached("prime", spec) if _valid_prime(spec) else Field("prime", spec)
    if isinstance(spec, str):
        if spec in ("q-omega", "qomega", "Q(w)"):
            return _cached("q-omega", None)
        try:
            return make_field(int(spec))
        except ValueError:
            raise MalformedInput(f"bad field spec {spec!r}") from None
    if isinstance(spec, dict):
        kind = spec.get("type")
        if kind == "prime":
            f = make_field(spec.get("p"))
            if "xi" in spec and spec["xi"] != f._xi:
                raise MalformedInput(f"xi={spec['xi']} disagrees with the canonical choice {f._xi}")
            return f
        if kind == "q-omega":
            return _cached("q-omega", None)
    raise MalformedInput(f"bad field spec {spec!r}")


def _valid_prime(p: int) -> bool:
    return p > 3 and p % 3 == 1 and _is_prime(p)
