"""Exact scalars (rationals and Gaussian rationals) and sparse linear algebra over Q.

Rationals are gmpy2 ``mpq``. Gaussian rationals are :class:`QI`; every
operation collapses a result with zero imaginary part back to ``mpq`` so the
common real case stays on the fast path.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from numbers import Number

import numpy as np
from gmpy2 import mpq

ZERO = mpq(0)
ONE = mpq(1)

_RATIONAL = (int, type(ZERO), Fraction)


def Q(x) -> mpq:
    """Convert ints, Fractions, 'p/q' strings and exact floats to mpq."""
    if isinstance(x, str):
        return mpq(x.strip())
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


class QI:
    """Gaussian rational re + i*im."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=0):
        self.re = mpq(re)
        self.im = mpq(im)

    @staticmethod
    def make(re, im):
        if im == 0:
            return mpq(re)
        q = QI.__new__(QI)
        q.re = re
        q.im = im
        return q

    def __repr__(self):
        return f"QI({self.re}, {self.im})"

    def __str__(self):
        return f"{self.re}+{self.im}i" if self.im >= 0 else f"{self.re}{self.im}i"

    def __hash__(self):
        return hash((self.re, self.im))

    def __eq__(self, other):
        if isinstance(other, QI):
            return self.re == other.re and self.im == other.im
        if isinstance(other, _RATIONAL):
            return self.im == 0 and self.re == other
        if isinstance(other, Number):
            return complex(self) == other
        return NotImplemented

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __neg__(self):
        return QI.make(-self.re, -self.im)

    def __pos__(self):
        return self

    def conjugate(self):
        return QI.make(self.re, -self.im)

    def __add__(self, o):
        if isinstance(o, QI):
            return QI.make(self.re + o.re, self.im + o.im)
        if isinstance(o, _RATIONAL):
            return QI.make(self.re + o, self.im)
        if isinstance(o, Number):
            return complex(self) + o
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, QI):
            return QI.make(self.re - o.re, self.im - o.im)
        if isinstance(o, _RATIONAL):
            return QI.make(self.re - o, self.im)
        if isinstance(o, Number):
            return complex(self) - o
        return NotImplemented

    def __rsub__(self, o):
        if isinstance(o, _RATIONAL):
            return QI.make(o - self.re, -self.im)
        if isinstance(o, Number):
            return o - complex(self)
        return NotImplemented

    def __mul__(self, o):
        if isinstance(o, QI):
            return QI.make(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
        if isinstance(o, _RATIONAL):
            return QI.make(self.re * o, self.im * o)
        if isinstance(o, Number):
            return complex(self) * o
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, QI):
            den = o.re * o.re + o.im * o.im
            return QI.make((self.re * o.re + self.im * o.im) / den,
                           (self.im * o.re - self.re * o.im) / den)
        if isinstance(o, _RATIONAL):
            return QI.make(self.re / o, self.im / o)
        if isinstance(o, Number):
            return complex(self) / o
        return NotImplemented

    def __rtruediv__(self, o):
        if isinstance(o, _RATIONAL):
            return _div(mpq(o), self)
        if isinstance(o, Number):
            return o / complex(self)
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            return complex(self) ** k
        out, base = ONE, self
        while k:
            if k & 1:
                out = base * out
            base = base * base
            k >>= 1
        return out


def _div(a: mpq, z: QI):
    den = z.re * z.re + z.im * z.im
    return QI.make(a * z.re / den, -a * z.im / den)


I = QI(0, 1)


def conj(x):
    """Complex conjugate for exact or float scalars."""
    if isinstance(x, QI):
        return x.conjugate()
    if isinstance(x, (complex, np.complexfloating)):
        return x.conjugate()
    return x


def re_part(x):
    return x.re if isinstance(x, QI) else (x.real if isinstance(x, complex) else x)


def im_part(x):
    return x.im if isinstance(x, QI) else (x.imag if isinstance(x, complex) else ZERO)


def is_exact(x) -> bool:
    return isinstance(x, (QI, int, Fraction)) or type(x) is type(ZERO)


def to_complex(x) -> complex:
    return complex(x) if isinstance(x, QI) else complex(float(x)) if is_exact(x) else complex(x)


def scalar_str(x) -> str:
    """Canonical string: 'p/q' for rationals, 'p/q+r/si' for Gaussian rationals."""
    if isinstance(x, QI):
        return str(x)
    if is_exact(x):
        return str(mpq(x))
    return repr(x)


def parse_scalar(s: str):
    s = s.strip()
    if s.endswith("i"):
        body = s[:-1]
        # split at the last sign that is not the leading one or an exponent sign
        for k in range(len(body) - 1, 0, -1):
            if body[k] in "+-" and body[k - 1] not in "eE":
                return QI(mpq(body[:k]), mpq(body[k:]))
        return QI(0, mpq(body))
    return mpq(s)


# ---------------------------------------------------------------- matrices

def zeros(r, c=None):
    c = r if c is None else c
    m = np.empty((r, c), dtype=object)
    m.fill(ZERO)
    return m


def eye(n):
    m = zeros(n)
    for i in range(n):
        m[i, i] = ONE
    return m


def exact_array(values) -> np.ndarray:
    a = np.array(values, dtype=object)
    flat = a.reshape(-1)
    for i, v in enumerate(flat):
        if not isinstance(v, QI):
            flat[i] = Q(v)
    return a


def mat_conj(m: np.ndarray) -> np.ndarray:
    out = np.empty_like(m)
    flat_in, flat_out = m.reshape(-1), out.reshape(-1)
    for i, v in enumerate(flat_in):
        flat_out[i] = conj(v)
    return out


def mat_inv(m: np.ndarray) -> np.ndarray:
    """Exact inverse by Gauss-Jordan (works over Q and Q(i))."""
    n = m.shape[0]
    a = np.concatenate([m.astype(object), eye(n)], axis=1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r, col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
        p = a[col, col]
        a[col] = [v / p for v in a[col]]
        for r in range(n):
            if r != col and a[r, col] != 0:
                f = a[r, col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return a[:, n:]


def mat_det(m: np.ndarray):
    n = m.shape[0]
    a = m.astype(object).copy()
    det = ONE
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r, col] != 0), None)
        if piv is None:
            return ZERO
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            det = -det
        p = a[col, col]
        det = det * p
        for r in range(col + 1, n):
            if a[r, col] != 0:
                f = a[r, col] / p
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def mat_trace(m: np.ndarray):
    t = ZERO
    for i in range(m.shape[0]):
        t = t + m[i, i]
    return t


def mat_is_zero(m: np.ndarray) -> bool:
    return all(v == 0 for v in m.reshape(-1))


# ------------------------------------------------------- sparse echelon over Q

class Echelon:
    """Incrementally maintained row echelon form of sparse rational vectors.

    Rows are dicts column -> mpq with leading coefficient 1. ``reduce``
    returns the remainder of a vector after elimination, so a zero remainder
    means membership in the span. With ``full=True`` the stored rows are kept
    fully reduced so that remainders are canonical normal forms.
    """

    def __init__(self, full: bool = False):
        self.rows: dict[int, dict] = {}
        self.full = full

    def __len__(self):
        return len(self.rows)

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, vec: dict) -> dict:
        v = {k: c for k, c in vec.items() if c != 0}
        rows = self.rows
        heap = [k for k in v if k in rows]
        heapq.heapify(heap)
        # a row only touches columns right of its pivot, so pivots are
        # eliminated in increasing order and never reappear
        while heap:
            col = heapq.heappop(heap)
            c = v.get(col)
            if not c:
                continue
            for k, rc in rows[col].items():
                nv = v.get(k, ZERO) - c * rc
                if nv:
                    if k not in v and k in rows:
                        heapq.heappush(heap, k)
                    v[k] = nv
                else:
                    v.pop(k, None)
        return v

    def add(self, vec: dict) -> bool:
        v = self.reduce(vec)
        if not v:
            return False
        piv = min(v)
        p = v[piv]
        row = {k: c / p for k, c in v.items()}
        if self.full:
            for other in self.rows.values():
                c = other.get(piv)
                if c:
                    for k, rc in row.items():
                        nv = other.get(k, ZERO) - c * rc
                        if nv:
                            other[k] = nv
                        else:
                            other.pop(k, None)
        self.rows[piv] = row
        return True


def nullspace(columns: list[dict]) -> list[list]:
    """Basis of {c : sum_j c_j columns[j] = 0} over Q.

    ``columns`` are sparse vectors (dict row-index -> mpq). Returns a list of
    coefficient lists of length len(columns).
    """
    m = len(columns)
    # Row-reduce the transpose: build rows indexed by equation, columns by unknown.
    eqs: dict = {}
    for j, col in enumerate(columns):
        for i, c in col.items():
            if c != 0:
                eqs.setdefault(i, {})[j] = mpq(c)
    ech = Echelon(full=True)
    for row in eqs.values():
        ech.add(row)
    pivots = set(ech.rows)
    free = [j for j in range(m) if j not in pivots]
    basis = []
    for f in free:
        sol = [ZERO] * m
        sol[f] = ONE
        for p, row in ech.rows.items():
            sol[p] = -row.get(f, ZERO)
        basis.append(sol)
    return basis


def solve(columns: list[dict], rhs: dict) -> list | None:
    """Solve sum_j x_j columns[j] = rhs exactly; None if inconsistent.

    Free unknowns are set to zero.
    """
    m = len(columns)
    aug = columns + [rhs]
    eqs: dict = {}
    for j, col in enumerate(aug):
        for i, c in col.items():
            if c != 0:
                eqs.setdefault(i, {})[j] = mpq(c)
    ech = Echelon(full=True)
    for row in eqs.values():
        ech.add(row)
    if m in ech.rows:
        return None
    sol = [ZERO] * m
    for p, row in ech.rows.items():
        sol[p] = row.get(m, ZERO)
    return sol
