"""Linear algebra for jet matrices over k[[u]] and k((u)).

Everything is exact up to the tracked precision: a routine either returns a
result whose known coefficients are correct, or raises a
:class:`~trikit.errors.PrecisionError`.  Residue-field helpers (``k_*``)
work on plain lists of raw field values.
"""

from __future__ import annotations

from collections import deque

from .errors import IndeterminateValuation, MalformedInput, PrecisionError
from .field import Field
from .series import DEFAULT_PREC, LaurentJet

__all__ = [
    "JetMatrix", "det", "inverse", "is_unimodular", "membership_solve",
    "column_reduce", "t_linear_solve", "kernel", "k_rref", "k_rank",
    "k_nullspace", "k_solve", "min_valuation",
]


def min_valuation(jets) -> int | None:
    vals = [x.start for x in jets if not x.is_zero()]
    return min(vals) if vals else None


def _min_prec(jets):
    ps = [x.prec for x in jets if x.prec is not None]
    return min(ps) if ps else None


class JetMatrix:
    """An m x n matrix of LaurentJets (row-major)."""

    __slots__ = ("field", "rows")

    def __init__(self, field: Field, rows):
        self.field = field
        self.rows = [list(r) for r in rows]

    # -- constructors ---------------------------------------------------
    @classmethod
    def zeros(cls, field, m, n=None):
        n = m if n is None else n
        z = LaurentJet.zero(field)
        return cls(field, [[z] * n for _ in range(m)])

    @classmethod
    def identity(cls, field, n):
        return cls.diag(field, [LaurentJet.one(field)] * n)

    @classmethod
    def diag(cls, field, entries):
        n = len(entries)
        z = LaurentJet.zero(field)
        rows = [[z] * n for _ in range(n)]
        for i, e in enumerate(entries):
            rows[i][i] = e if isinstance(e, LaurentJet) else LaurentJet.const(field, e)
        return cls(field, rows)

    @classmethod
    def from_ints(cls, field, rows):
        return cls(field, [[LaurentJet.const(field, v) for v in r] for r in rows])

    @classmethod
    def from_columns(cls, field, cols):
        cols = [list(c) for c in cols]
        m = len(cols[0]) if cols else 0
        return cls(field, [[c[i] for c in cols] for i in range(m)])

    # -- shape & access ---------------------------------------------------
    @property
    def shape(self):
        return len(self.rows), (len(self.rows[0]) if self.rows else 0)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def column(self, j):
        return [r[j] for r in self.rows]

    def columns(self):
        return [self.column(j) for j in range(self.shape[1])]

    def entries(self):
        return [x for r in self.rows for x in r]

    # -- arithmetic -------------------------------------------------------
    def __matmul__(self, other):
        if isinstance(other, JetMatrix):
            m, k = self.shape
            k2, n = other.shape
            if k != k2:
                raise MalformedInput(f"shape mismatch {self.shape} @ {other.shape}")
            cols = other.columns()
            return JetMatrix(self.field, [[_dot(r, c, self.field) for c in cols] for r in self.rows])
        # matrix @ vector (list of jets)
        return [_dot(r, other, self.field) for r in self.rows]

    def __add__(self, other):
        return JetMatrix(self.field, [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return JetMatrix(self.field, [[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return JetMatrix(self.field, [[-a for a in r] for r in self.rows])

    def scale(self, lam: LaurentJet):
        return JetMatrix(self.field, [[lam * a for a in r] for r in self.rows])

    @property
    def T(self):
        return JetMatrix(self.field, [list(c) for c in zip(*self.rows)])

    def galois(self, power=1):
        return JetMatrix(self.field, [[a.galois(power) for a in r] for r in self.rows])

    def truncate(self, prec):
        return JetMatrix(self.field, [[a.truncate(prec) for a in r] for r in self.rows])

    # -- queries ----------------------------------------------------------
    def min_valuation(self):
        return min_valuation(self.entries())

    def precision(self):
        return _min_prec(self.entries())

    def is_integral(self) -> bool:
        return all(a.is_integral() for a in self.entries())

    def residue(self):
        """Entrywise reduction mod u as raw field values."""
        return [[a.residue().raw for a in r] for r in self.rows]

    def agrees(self, other) -> bool:
        """Entrywise equality to the common precision."""
        return all((a - b).is_zero() for a, b in zip(self.entries(), other.entries()))

    def is_exact(self):
        return all(a.prec is None for a in self.entries())

    def to_json(self):
        return [[a.to_json() for a in r] for r in self.rows]

    @classmethod
    def from_json(cls, field, obj):
        if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
            raise MalformedInput("matrix must be a nested list of jets")
        n = len(obj[0])
        if any(len(r) != n for r in obj):
            raise MalformedInput("ragged matrix")
        return cls(field, [[LaurentJet.from_json(field, a) for a in r] for r in obj])

    def __repr__(self):
        return "JetMatrix(\n" + "\n".join("  " + repr(r) for r in self.rows) + ")"


def _dot(row, col, field):
    acc = None
    for a, b in zip(row, col):
        if a.prec is None and not len(a.c):
            continue
        if b.prec is None and not len(b.c):
            continue
        t = a * b
        acc = t if acc is None else acc + t
    return acc if acc is not None else LaurentJet.zero(field)


# ---------------------------------------------------------------------------
# determinants and inverses


def det(M: JetMatrix) -> LaurentJet:
    """Division-free determinant (Laplace expansion memoized over column sets)."""
    n, m = M.shape
    if n != m:
        raise MalformedInput("det of a non-square matrix")
    f = M.field
    dp = {0: LaurentJet.one(f)}
    for r in range(n):
        nxt = {}
        row = M.rows[r]
        for mask, val in dp.items():
            if val.prec is None and val.is_zero():
                continue
            # sign = (-1)^(number of used columns greater than c)
            for c in range(n):
                bit = 1 << c
                if mask & bit:
                    continue
                a = row[c]
                if a.prec is None and a.is_zero():
                    continue
                above = bin(mask >> (c + 1)).count("1")
                term = a * val
                if above % 2:
                    term = -term
                key = mask | bit
                nxt[key] = term if key not in nxt else nxt[key] + term
        dp = nxt
    return dp.get((1 << n) - 1, LaurentJet.zero(f))


def _gauss_jordan(M: JetMatrix, work: int) -> JetMatrix:
    n = M.shape[0]
    f = M.field
    one, zero = LaurentJet.one(f), LaurentJet.zero(f)
    A = [list(M.rows[i]) + [one if j == i else zero for j in range(n)] for i in range(n)]
    for c in range(n):
        best = None
        for r in range(c, n):
            x = A[r][c]
            if x.is_zero():
                continue
            if best is None or x.start < A[best][c].start:
                best = r
        if best is None:
            raise IndeterminateValuation("indeterminate valuation: matrix is singular to precision")
        A[c], A[best] = A[best], A[c]
        inv = A[c][c].invert_unit(work)
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r == c:
                continue
            fac = A[r][c]
            if fac.prec is None and fac.is_zero():
                continue
            A[r] = [x - fac * y for x, y in zip(A[r], A[c])]
    return JetMatrix(f, [row[n:] for row in A])


def inverse(M: JetMatrix, prec: int = DEFAULT_PREC, max_rounds: int = 8) -> JetMatrix:
    """Inverse over k((u)) whose entries are known to absolute precision >= prec."""
    n, m = M.shape
    if n != m:
        raise MalformedInput("inverse of a non-square matrix")
    v = M.min_valuation()
    if v is None:
        raise IndeterminateValuation("indeterminate valuation: zero matrix")
    work = max(prec, 1) + 2 * abs(v) + 8
    for _ in range(max_rounds):
        R = _gauss_jordan(M, work)
        got = R.precision()
        if got is None or got >= prec:
            return R
        work += prec - got + 8
    raise PrecisionError(f"precision exhausted: inverse reached u^{got}, wanted u^{prec}")


def is_unimodular(M: JetMatrix) -> bool:
    """Entries integral and det a unit of k[[u]]."""
    if not M.is_integral():
        return False
    return det(M).is_unit_integral()


def membership_solve(B: JetMatrix, v, prec: int = 0, Binv: JetMatrix | None = None):
    """Coordinates z with B z = v and whether z is integral (v in the column span over k[[u]])."""
    vv = min_valuation(v)
    if vv is None:
        vv = 0
    if Binv is None:
        Binv = inverse(B, prec - vv)
    z = Binv @ list(v)
    for x in z:
        if x.prec is not None and x.prec < min(prec, 0) + (0 if x.is_zero() else 0):
            raise PrecisionError("precision exhausted in membership solve")
    return z, all(x.is_integral() for x in z)


# ---------------------------------------------------------------------------
# column reduction over k[[u]]


def column_reduce(cols, work: int = DEFAULT_PREC):
    """Hermite-style reduction of column vectors over k[[u]].

    Returns ``(pivots, basis)``: indices of the input columns chosen as
    pivots and the reduced columns spanning the same k[[u]]-module.
    """
    cols = [list(c) for c in cols]
    if not cols:
        return [], []
    nrows = len(cols[0])
    remaining = list(range(len(cols)))
    pivots, basis = [], []
    for r in range(nrows):
        cand = [j for j in remaining if not cols[j][r].is_zero()]
        if not cand:
            continue
        j0 = min(cand, key=lambda j: (cols[j][r].start, j))
        piv = cols[j0][r]
        inv = piv.invert_unit(work)
        for j in remaining:
            if j == j0:
                continue
            a = cols[j][r]
            if a.prec is None and a.is_zero():
                continue
            if not a.is_zero() and a.start < piv.start:
                raise PrecisionError("precision exhausted: pivot valuation ambiguous")
            q = a * inv
            cols[j] = [x - q * y for x, y in zip(cols[j], cols[j0])]
        remaining.remove(j0)
        pivots.append(j0)
        basis.append(cols[j0])
    return pivots, basis


# ---------------------------------------------------------------------------
# kernels over a valued field (k((u)) or k((t)) -- the jet variable is formal)


def kernel(rows, n: int, field: Field, work: int = DEFAULT_PREC):
    """Kernel basis of a sparse homogeneous system.

    ``rows`` is a list of dicts {column: jet}.  Reduced row-echelon form is
    built column by column, pivoting on minimal valuation then lowest row.
    """
    rows = [dict(r) for r in rows]
    pivot_rows = {}
    for c in range(n):
        best = None
        for idx, r in enumerate(rows):
            if r is None:
                continue
            x = r.get(c)
            if x is None or x.is_zero():
                continue
            if best is None or x.start < rows[best][c].start:
                best = idx
        if best is None:
            continue
        prow = rows[best]
        rows[best] = None
        inv = prow[c].invert_unit(work)
        prow = {k: v * inv for k, v in prow.items()}
        prow[c] = LaurentJet.one(field)
        for idx, r in enumerate(rows):
            if r is None or c not in r:
                continue
            fac = r.pop(c)
            if fac.prec is None and fac.is_zero():
                continue
            for k, v in prow.items():
                if k == c:
                    continue
                t = fac * v
                r[k] = r[k] - t if k in r else -t
        for c2, pr in pivot_rows.items():
            if c in pr:
                fac = pr.pop(c)
                for k, v in prow.items():
                    if k == c:
                        continue
                    t = fac * v
                    pr[k] = pr[k] - t if k in pr else -t
        prow.pop(c)
        pivot_rows[c] = prow
        rows = [r if r is None or any(not v.is_zero() for v in r.values()) else None for r in rows]
    free = [c for c in range(n) if c not in pivot_rows]
    zero, one = LaurentJet.zero(field), LaurentJet.one(field)
    basis = []
    for fc in free:
        vec = [zero] * n
        vec[fc] = one
        for c, pr in pivot_rows.items():
            if fc in pr:
                vec[c] = -pr[fc]
        basis.append(vec)
    return basis


def _twist_shifts(equations, n):
    """Find shifts making every equation F-linear in y_m = sigma^{s_m}(x_m), or None."""
    shift_u = [None] * n
    shift_e = [None] * len(equations)
    by_unknown = [[] for _ in range(n)]
    for e, eq in enumerate(equations):
        for (m, s) in eq:
            by_unknown[m].append((e, s))
    for e0 in range(len(equations)):
        if shift_e[e0] is not None:
            continue
        shift_e[e0] = 0
        queue = deque([("e", e0)])
        while queue:
            kind, i = queue.popleft()
            if kind == "e":
                for (m, s) in equations[i]:
                    want = (s + shift_e[i]) % 3
                    if shift_u[m] is None:
                        shift_u[m] = want
                        queue.append(("u", m))
                    elif shift_u[m] != want:
                        return None
            else:
                for (e, s) in by_unknown[i]:
                    want = (shift_u[i] - s) % 3
                    if shift_e[e] is None:
                        shift_e[e] = want
                        queue.append(("e", e))
                    elif shift_e[e] != want:
                        return None
    return [s or 0 for s in shift_u], shift_e


def _t_part(x: LaurentJet, r: int) -> LaurentJet:
    """The k((t))-coordinate X_r of x = sum_r u^r X_r(u^3), as a jet in t."""
    f = x.field
    d = {}
    for i, a in enumerate(x.c):
        e = x.start + i
        if a and e % 3 == r:
            d[(e - r) // 3] = a
    prec = None if x.prec is None else -((r - x.prec) // 3)  # ceil((prec - r)/3)
    return LaurentJet.from_dict(f, d, prec)


def _from_t(x: LaurentJet) -> LaurentJet:
    """Substitute t = u^3 into a jet in t."""
    f = x.field
    d = {3 * (x.start + i): a for i, a in enumerate(x.c) if a}
    return LaurentJet.from_dict(f, d, None if x.prec is None else 3 * x.prec)


def t_linear_solve(equations, n: int, field: Field, work: int = DEFAULT_PREC):
    """k((t))-basis of solutions of a semilinear homogeneous system over k((u)).

    Each equation is a dict ``{(m, s): c}`` meaning sum c * sigma^s(x_m) = 0,
    with sigma = rho and unknowns x_0..x_{n-1} in k((u)).  Returns
    ``(basis, info)`` where ``info`` records the method and dimensions.
    """
    equations = [dict(eq) for eq in equations]
    shifts = _twist_shifts(equations, n)
    if shifts is not None:
        su, se = shifts
        rows = []
        for e, eq in enumerate(equations):
            row = {}
            for (m, s), c in eq.items():
                c = c.galois(se[e])
                row[m] = row[m] + c if m in row else c
            rows.append(row)
        kern = kernel(rows, n, field, work)
        basis = []
        for y in kern:
            for r in range(3):
                lam = LaurentJet.monomial(field, 1, r)
                basis.append([(lam * y[m]).galois(-su[m]) for m in range(n)])
        return basis, {"method": "twist-normalized", "dim_F": len(kern), "dim_t": len(basis)}
    # general case: expand each unknown into its three t-coordinates
    rows = []
    for eq in equations:
        parts = [dict(), dict(), dict()]
        for (m, s), c in eq.items():
            for r in range(3):
                # c * sigma^s(u^r X) = c * xi^{rs} u^r X
                cc = c.scale(field.xi_pow(r * s)).shift(r)
                for cls in range(3):
                    piece = _t_part(cc, cls)
                    if piece.prec is None and piece.is_zero():
                        continue
                    key = 3 * m + r
                    parts[cls][key] = parts[cls][key] + piece if key in parts[cls] else piece
        rows.extend(p for p in parts if p)
    kern = kernel(rows, 3 * n, field, work)
    basis = []
    for y in kern:
        vec = []
        for m in range(n):
            acc = LaurentJet.zero(field)
            for r in range(3):
                acc = acc + _from_t(y[3 * m + r]).shift(r)
            vec.append(acc)
        basis.append(vec)
    return basis, {"method": "t-expansion", "dim_t": len(basis)}


# ---------------------------------------------------------------------------
# residue-field linear algebra on raw values


def k_rref(field: Field, rows, ncols=None):
    rows = [list(r) for r in rows]
    if not rows:
        return [], []
    ncols = len(rows[0]) if ncols is None else ncols
    piv = []
    r = 0
    for c in range(ncols):
        sel = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if sel is None:
            continue
        rows[r], rows[sel] = rows[sel], rows[r]
        inv = field.inv(rows[r][c])
        rows[r] = [field.mul(x, inv) for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                fac = rows[i][c]
                rows[i] = [field.sub(x, field.mul(fac, y)) for x, y in zip(rows[i], rows[r])]
        piv.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], piv


def k_rank(field: Field, rows) -> int:
    return len(k_rref(field, rows)[1])


def k_nullspace(field: Field, rows, ncols: int):
    red, piv = k_rref(field, rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in piv]
    out = []
    for fc in free:
        v = [field.zero] * ncols
        v[fc] = field.one
        for r, pc in zip(red, piv):
            v[pc] = field.neg(r[fc])
        out.append(v)
    return out


def k_solve(field: Field, A, b):
    """One solution x of A x = b over the residue field, or None."""
    n = len(A[0])
    aug = [list(r) + [bi] for r, bi in zip(A, b)]
    red, piv = k_rref(field, aug, n + 1)
    if n in piv:
        return None
    x = [field.zero] * n
    for r, pc in zip(red, piv):
        x[pc] = r[n]
    return x
