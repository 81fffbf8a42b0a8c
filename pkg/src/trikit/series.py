"""Truncated Laurent series ("jets") in u over an exact coefficient field.

A jet stores the coefficients it knows and an absolute precision ``prec``:
every coefficient at an exponent below ``prec`` is known exactly, nothing at
or above it is.  ``prec is None`` marks an exact Laurent polynomial.

The order-3 Galois action is rho(u) = xi*u, theta = rho^2; t = u^3 is fixed.
"""

from __future__ import annotations

import numpy as np

from .errors import IndeterminateValuation, MalformedInput, PrecisionError
from .field import Field, FieldElement

__all__ = ["LaurentJet", "jet", "DEFAULT_PREC"]

DEFAULT_PREC = 24


def _pmin(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a if a < b else b


def _padd(a, b):
    return None if a is None or b is None else a + b


class LaurentJet:
    __slots__ = ("field", "start", "c", "prec")

    def __init__(self, field: Field, start: int, coeffs: np.ndarray, prec: int | None):
        # callers go through _make; this stores an already-normalized jet
        self.field = field
        self.start = start
        self.c = coeffs
        self.prec = prec

    # -- construction ---------------------------------------------------
    @classmethod
    def _make(cls, field, start, arr, prec):
        n = len(arr)
        if prec is not None and start + n > prec:
            n = max(prec - start, 0)
            arr = arr[:n]
        if n:
            nz = np.flatnonzero(arr)
            if len(nz):
                lo, hi = nz[0], nz[-1] + 1
                if lo or hi < n:
                    arr = arr[lo:hi]
                return cls(field, start + int(lo), arr, prec)
        return cls(field, 0, arr[:0], prec)

    @classmethod
    def from_dict(cls, field: Field, coeffs: dict, prec: int | None = None) -> "LaurentJet":
        items = {int(k): field.coerce(v) for k, v in coeffs.items()}
        if prec is not None:
            items = {k: v for k, v in items.items() if k < prec}
        items = {k: v for k, v in items.items() if v}
        if not items:
            return cls(field, 0, field.zeros(0), prec)
        lo, hi = min(items), max(items)
        vals = [field.zero] * (hi - lo + 1)
        for k, v in items.items():
            vals[k - lo] = v
        return cls._make(field, lo, field.array(vals), prec)

    @classmethod
    def zero(cls, field: Field, prec: int | None = None) -> "LaurentJet":
        return cls(field, 0, field.zeros(0), prec)

    @classmethod
    def const(cls, field: Field, value, prec: int | None = None) -> "LaurentJet":
        return cls.monomial(field, value, 0, prec)

    @classmethod
    def one(cls, field: Field) -> "LaurentJet":
        return cls.const(field, 1)

    @classmethod
    def monomial(cls, field: Field, value, exponent: int, prec: int | None = None) -> "LaurentJet":
        return cls.from_dict(field, {exponent: value}, prec)

    @classmethod
    def from_array(cls, field: Field, start: int, arr, prec: int | None = None) -> "LaurentJet":
        a = field.array(list(arr)) if not isinstance(arr, np.ndarray) else field.reduce(arr)
        return cls._make(field, start, a, prec)

    # -- inspection -----------------------------------------------------
    @property
    def is_exact(self) -> bool:
        return self.prec is None

    def is_zero(self) -> bool:
        """True when every known coefficient vanishes (zero *to precision*)."""
        return len(self.c) == 0

    @property
    def valuation(self) -> int:
        if not len(self.c):
            raise IndeterminateValuation("indeterminate valuation: jet is zero to its precision")
        return self.start

    def vlb(self):
        """Lower bound for the valuation of the true series (None = exact zero)."""
        return self.start if len(self.c) else self.prec

    @property
    def end(self) -> int:
        return self.start + len(self.c)

    def coeff(self, n: int) -> FieldElement:
        if self.prec is not None and n >= self.prec:
            raise PrecisionError(f"coefficient u^{n} is beyond precision {self.prec}")
        i = n - self.start
        if 0 <= i < len(self.c):
            return FieldElement(self.field, self.c[i])
        return FieldElement(self.field, self.field.zero)

    def raw(self, n: int):
        i = n - self.start
        return self.c[i] if 0 <= i < len(self.c) else self.field.zero

    @property
    def coeffs(self) -> dict:
        return {self.start + i: FieldElement(self.field, v) for i, v in enumerate(self.c) if v}

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, LaurentJet):
            if other.field != self.field:
                raise MalformedInput("jets over different fields")
            return other
        if isinstance(other, (int, FieldElement)):
            return LaurentJet.const(self.field, other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return _addsub(self, o, 1)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return _addsub(self, o, -1)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return _addsub(o, self, -1)

    def __neg__(self):
        return LaurentJet(self.field, self.start, self.field.reduce(-self.c), self.prec)

    def __mul__(self, other):
        if isinstance(other, (int, FieldElement)):
            return self.scale(self.field.coerce(other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return _mul(self, o)

    __rmul__ = __mul__

    def scale(self, raw) -> "LaurentJet":
        """Multiply by a raw field scalar."""
        if not raw:
            return LaurentJet.zero(self.field, self.prec)
        if raw == self.field.one:
            return self
        return LaurentJet._make(self.field, self.start, self.field.reduce(self.c * raw), self.prec)

    def shift(self, n: int) -> "LaurentJet":
        """Multiply by u^n."""
        return LaurentJet(self.field, self.start + n if len(self.c) else 0, self.c, _padd(self.prec, n))

    def truncate(self, prec: int | None) -> "LaurentJet":
        p = _pmin(self.prec, prec)
        if p == self.prec:
            return self
        return LaurentJet._make(self.field, self.start, self.c, p)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).is_zero()

    __hash__ = None

    # -- Galois action ---------------------------------------------------
    def galois(self, power: int = 1) -> "LaurentJet":
        """Apply rho^power: coefficient a_n at u^n becomes a_n * xi^(n*power)."""
        power %= 3
        if power == 0 or not len(self.c):
            return self
        f = self.field
        idx = (np.arange(self.start, self.end) * power) % 3
        table = np.empty(3, dtype=f.dtype)
        table[:] = list(f.xi_pows)
        return LaurentJet(f, self.start, f.reduce(self.c * table[idx]), self.prec)

    def rho(self) -> "LaurentJet":
        return self.galois(1)

    def theta(self) -> "LaurentJet":
        return self.galois(2)

    def is_rho_fixed(self) -> bool:
        return bool(np.all(self._support() % 3 == 0))

    def _support(self):
        return np.flatnonzero(self.c) + self.start

    # -- integrality -----------------------------------------------------
    def _require_known(self):
        if not len(self.c) and self.prec is not None and self.prec <= 0:
            raise PrecisionError("insufficient precision to decide integrality")

    def is_integral(self) -> bool:
        if len(self.c):
            return self.start >= 0
        self._require_known()
        return True

    def is_unit_integral(self) -> bool:
        if len(self.c):
            return self.start == 0
        self._require_known()
        return False

    def residue(self) -> FieldElement:
        if len(self.c) and self.start < 0:
            raise MalformedInput("not integral: residue undefined")
        if self.prec is not None and self.prec <= 0:
            raise PrecisionError("insufficient precision for the residue")
        return FieldElement(self.field, self.raw(0))

    # -- inversion -------------------------------------------------------
    def invert_unit(self, target_prec: int = DEFAULT_PREC) -> "LaurentJet":
        """Inverse y with x*y = 1 mod u^target_prec; val(y) = -val(x)."""
        if not len(self.c):
            raise IndeterminateValuation("indeterminate valuation: cannot invert a jet that is zero to precision")
        f, v = self.field, self.start
        if len(self.c) == 1:
            inv = LaurentJet(f, -v, f.array([f.inv(self.c[0])]), None)
            if self.prec is None:
                return inv
            return inv.truncate(self.prec - 2 * v)
        m = target_prec if self.prec is None else min(target_prec, self.prec - v)
        m = max(m, 1)
        return LaurentJet._make(f, -v, _series_inverse(f, self.c, m), m - v)

    def sqrt(self, target_prec: int = DEFAULT_PREC):
        """A square root mod u^(val/2 + target_prec), or None when none exists in k((u))."""
        v = self.valuation
        if v % 2:
            return None
        f = self.field
        r0 = f.sqrt(self.c[0])
        if r0 is None:
            return None
        m = target_prec if self.prec is None else min(target_prec, self.prec - v)
        unit = LaurentJet(f, 0, f.reduce(self.c * f.inv(self.c[0])), None if self.prec is None else self.prec - v)
        # Newton on y^2 = unit starting from 1
        y = LaurentJet.one(f)
        half = f.inv(2)
        k = 1
        while True:
            k = min(2 * k, m)
            z = y.invert_unit(k)
            y = ((y + (unit * z).truncate(k)) * half).truncate(k)
            # quadratic convergence: the iterate is correct mod u^k, carry it as a polynomial
            y = LaurentJet(f, y.start, y.c, None)
            if k >= m:
                break
        out = y.scale(r0).shift(v // 2)
        if len(self.c) == 1 and self.prec is None:
            return LaurentJet.monomial(f, r0, v // 2)
        return out.truncate(v // 2 + m)

    # -- serialization ---------------------------------------------------
    def to_json(self) -> dict:
        f = self.field
        return {"prec": self.prec,
                "coeffs": {str(self.start + i): f.raw_to_json(a) for i, a in enumerate(self.c) if a}}

    @classmethod
    def from_json(cls, field: Field, obj) -> "LaurentJet":
        if isinstance(obj, (int, list)) and not isinstance(obj, bool):
            return cls.const(field, field.raw_from_json(obj))
        if not isinstance(obj, dict) or "coeffs" not in obj:
            raise MalformedInput(f"bad jet {obj!r}")
        prec = obj.get("prec")
        if prec is not None and (not isinstance(prec, int) or isinstance(prec, bool)):
            raise MalformedInput(f"bad jet precision {prec!r}")
        try:
            coeffs = {int(k): field.raw_from_json(v) for k, v in obj["coeffs"].items()}
        except (TypeError, ValueError, AttributeError) as exc:
            raise MalformedInput(f"bad jet coefficients: {exc}") from None
        return cls.from_dict(field, coeffs, prec)

    def __repr__(self):
        terms = []
        for i, a in enumerate(self.c):
            if a:
                n = self.start + i
                terms.append(f"{a}" if n == 0 else f"{a}*u^{n}")
        body = " + ".join(terms) if terms else "0"
        return body if self.prec is None else f"{body} + O(u^{self.prec})"


def _addsub(x: LaurentJet, y: LaurentJet, sign: int) -> LaurentJet:
    f = x.field
    prec = _pmin(x.prec, y.prec)
    if not len(y.c):
        return x.truncate(prec)
    if not len(x.c):
        out = y if sign > 0 else -y
        return out.truncate(prec)
    lo = min(x.start, y.start)
    hi = max(x.end, y.end)
    if prec is not None:
        hi = min(hi, prec)
    if hi <= lo:
        return LaurentJet.zero(f, prec)
    arr = f.zeros(hi - lo)
    a = x.c[: max(hi - x.start, 0)]
    arr[x.start - lo: x.start - lo + len(a)] += a
    b = y.c[: max(hi - y.start, 0)]
    if sign > 0:
        arr[y.start - lo: y.start - lo + len(b)] += b
    else:
        arr[y.start - lo: y.start - lo + len(b)] -= b
    return LaurentJet._make(f, lo, f.reduce(arr), prec)


def _mul(x: LaurentJet, y: LaurentJet) -> LaurentJet:
    f = x.field
    vx, vy = x.vlb(), y.vlb()
    if vx is None or vy is None:
        # one factor is an exact zero
        return LaurentJet.zero(f)
    prec = _pmin(_padd(x.prec, vy), _padd(y.prec, vx))
    if not len(x.c) or not len(y.c):
        return LaurentJet.zero(f, prec)
    a, b = x.c, y.c
    start = x.start + y.start
    if prec is not None:
        if prec <= start:
            return LaurentJet.zero(f, prec)
        a = a[: prec - start]
        b = b[: prec - start]
    if len(a) == 1:
        arr = f.reduce(b * a[0])
    elif len(b) == 1:
        arr = f.reduce(a * b[0])
    else:
        arr = f.conv(a, b)
    return LaurentJet._make(f, start, arr, prec)


def _series_inverse(f: Field, c: np.ndarray, m: int) -> np.ndarray:
    """Coefficients of 1/(c[0] + c[1] u + ...) mod u^m."""
    c0inv = f.inv(c[0])
    y = f.array([c0inv])
    k = 1
    while k < m:
        k = min(2 * k, m)
        cy = f.conv(c[:k], y)[:k]
        # y <- y * (2 - c*y)
        corr = f.reduce(-cy)
        corr[0] = f.add(corr[0], 2)
        y = f.conv(y, corr)[:k]
    if len(y) < m:
        y = np.concatenate([y, f.zeros(m - len(y))])
    return y


def jet(field: Field, coeffs, prec: int | None = None) -> LaurentJet:
    """Convenience constructor: ``jet(F, {0: 1, 1: 1})`` or ``jet(F, 3)``."""
    if isinstance(coeffs, LaurentJet):
        return coeffs.truncate(prec)
    if isinstance(coeffs, dict):
        return LaurentJet.from_dict(field, coeffs, prec)
    return LaurentJet.const(field, coeffs, prec)
