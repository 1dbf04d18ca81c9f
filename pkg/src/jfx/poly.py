"""Sparse multivariate polynomials with exact (Q or Q(i)) or float coefficients."""

from __future__ import annotations

import json
from itertools import combinations_with_replacement
from math import comb

import numpy as np
from gmpy2 import mpq

from .exact import QI, ZERO, ONE, conj, is_exact, parse_scalar, scalar_str, to_complex

Exp = tuple


class Poly:
    """Polynomial in ``nvars`` variables stored as {exponent tuple: coefficient}.

    Zero coefficients are never stored. Instances are treated as immutable.
    """

    __slots__ = ("nvars", "terms", "_compiled")

    def __init__(self, nvars: int, terms: dict | None = None):
        self.nvars = nvars
        self.terms = {} if terms is None else {k: v for k, v in terms.items() if v != 0}
        self._compiled = None

    @classmethod
    def _raw(cls, nvars, terms):
        p = cls.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        p._compiled = None
        return p

    # --------------------------------------------------------- constructors
    @classmethod
    def zero(cls, nvars):
        return cls._raw(nvars, {})

    @classmethod
    def const(cls, nvars, c):
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars, i, coeff=ONE):
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): coeff})

    @classmethod
    def linear(cls, coeffs):
        """Linear form sum_i coeffs[i] * z_i."""
        n = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            if c != 0:
                e = [0] * n
                e[i] = 1
                terms[tuple(e)] = c
        return cls._raw(n, terms)

    @classmethod
    def monomial(cls, exp, coeff=ONE):
        return cls(len(exp), {tuple(exp): coeff})

    # ------------------------------------------------------------ basics
    def __repr__(self):
        if not self.terms:
            return "Poly(0)"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True)[:8]:
            mono = "*".join(f"z{i}^{k}" if k > 1 else f"z{i}" for i, k in enumerate(e) if k)
            parts.append(f"({scalar_str(c)}){('*' + mono) if mono else ''}")
        more = " + ..." if len(self.terms) > 8 else ""
        return "Poly(" + " + ".join(parts) + more + ")"

    def __len__(self):
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    @property
    def mindegree(self) -> int:
        return min((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def homogeneous_part(self, d: int) -> "Poly":
        return Poly._raw(self.nvars, {e: c for e, c in self.terms.items() if sum(e) == d})

    def shells(self) -> dict:
        out: dict = {}
        for e, c in self.terms.items():
            out.setdefault(sum(e), {})[e] = c
        return {d: Poly._raw(self.nvars, t) for d, t in sorted(out.items())}

    def truncate(self, d: int) -> "Poly":
        return Poly._raw(self.nvars, {e: c for e, c in self.terms.items() if sum(e) <= d})

    def constant_term(self):
        return self.terms.get((0,) * self.nvars, ZERO)

    def map_coeffs(self, f) -> "Poly":
        return Poly(self.nvars, {e: f(c) for e, c in self.terms.items()})

    def conj_coeffs(self) -> "Poly":
        """The polynomial q-bar(z) = conj(q(conj z)): coefficients conjugated."""
        return Poly._raw(self.nvars, {e: conj(c) for e, c in self.terms.items()})

    def real_imag(self) -> tuple["Poly", "Poly"]:
        re, im = {}, {}
        for e, c in self.terms.items():
            if isinstance(c, QI):
                re[e] = c.re
                im[e] = c.im
            elif isinstance(c, complex):
                if c.real:
                    re[e] = c.real
                if c.imag:
                    im[e] = c.imag
            else:
                re[e] = c
        return Poly(self.nvars, re), Poly(self.nvars, im)

    def is_exact(self) -> bool:
        return all(is_exact(c) for c in self.terms.values())

    # ---------------------------------------------------------- arithmetic
    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("polynomials live in different rings")
            return other
        return Poly.const(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            v = t.get(e, ZERO) + c
            if v != 0:
                t[e] = v
            else:
                t.pop(e, None)
        return Poly._raw(self.nvars, t)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, s) -> "Poly":
        if s == 0:
            return Poly.zero(self.nvars)
        return Poly._raw(self.nvars, {e: c * s for e, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        if other.nvars != self.nvars:
            raise ValueError("polynomials live in different rings")
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        t: dict = {}
        for eb, cb in b.items():
            for ea, ca in a.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                v = t.get(e, ZERO) + ca * cb
                if v != 0:
                    t[e] = v
                else:
                    t.pop(e, None)
        return Poly._raw(self.nvars, t)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, s):
        return self.scale(ONE / s if is_exact(s) and not isinstance(s, QI) else 1 / s)

    def __pow__(self, k: int):
        out = Poly.const(self.nvars, ONE)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # ------------------------------------------------------------ calculus
    def diff(self, i: int, k: int = 1) -> "Poly":
        t = {}
        for e, c in self.terms.items():
            ei = e[i]
            if ei >= k:
                f = 1
                for j in range(k):
                    f *= ei - j
                ne = e[:i] + (ei - k,) + e[i + 1:]
                t[ne] = c * f
        return Poly._raw(self.nvars, t)

    def diff_multi(self, alpha) -> "Poly":
        """Apply the partial derivative with multi-index alpha."""
        t = {}
        for e, c in self.terms.items():
            f = 1
            ok = True
            for ei, ai in zip(e, alpha):
                if ei < ai:
                    ok = False
                    break
                for j in range(ai):
                    f *= ei - j
            if ok:
                t[tuple(x - y for x, y in zip(e, alpha))] = c * f
        return Poly._raw(self.nvars, t)

    def gradient_coords(self) -> list["Poly"]:
        return [self.diff(i) for i in range(self.nvars)]

    # --------------------------------------------------------- evaluation
    def __call__(self, point):
        return self.eval(point)

    def eval(self, point):
        """Evaluate at a single point; exact if point and coefficients are exact."""
        pt = list(point)
        if any(isinstance(v, (float, complex, np.inexact)) for v in pt):
            # numeric point: plain float or complex result
            val = complex(self.eval_many(np.asarray(pt, dtype=complex)[None, :])[0])
            is_complex = any(isinstance(v, (complex, np.complexfloating)) for v in pt)
            return val if is_complex else val.real
        powers = [dict() for _ in pt]
        total = ZERO
        for e, c in self.terms.items():
            v = c
            for i, k in enumerate(e):
                if k:
                    pw = powers[i].get(k)
                    if pw is None:
                        pw = pt[i] ** k
                        powers[i][k] = pw
                    v = v * pw
            total = total + v
        return total

    def compiled(self):
        """(exponents int64 [T, n], coefficients complex128 [T]) for fast numeric evaluation."""
        if self._compiled is None:
            items = sorted(self.terms.items())
            exps = np.array([e for e, _ in items], dtype=np.int64).reshape(len(items), self.nvars)
            coeffs = np.array([to_complex(c) for _, c in items], dtype=np.complex128)
            self._compiled = (exps, coeffs)
        return self._compiled

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at complex points of shape [N, n]; returns complex [N]."""
        from ._accel import poly_eval_many

        exps, coeffs = self.compiled()
        pts = np.ascontiguousarray(points, dtype=np.complex128).reshape(-1, self.nvars)
        return poly_eval_many(exps, coeffs, pts)

    # ------------------------------------------------------- substitution
    def linear_substitute(self, mat) -> "Poly":
        """The polynomial z -> p(M z) for an n x n matrix M (object or numeric)."""
        n = self.nvars
        forms = [Poly.linear([mat[i, j] for j in range(n)]) for i in range(n)]
        return self.compose(forms)

    def compose(self, polys) -> "Poly":
        """Substitute variable i by polys[i]."""
        if not self.terms:
            return Poly.zero(polys[0].nvars if polys else self.nvars)
        m = polys[0].nvars
        cache = [dict() for _ in polys]

        def power(i, k):
            c = cache[i]
            if k not in c:
                c[k] = polys[i] ** k if k < 2 or (k - 1) not in c else c[k - 1] * polys[i]
            return c[k]

        out = Poly.zero(m)
        for e, coeff in self.terms.items():
            term = Poly.const(m, coeff)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            out = out + term
        return out

    def shift(self, a) -> "Poly":
        """The polynomial x -> p(a + x)."""
        n = self.nvars
        forms = [Poly.var(n, i) + Poly.const(n, a[i]) for i in range(n)]
        return self.compose(forms)

    # ---------------------------------------------------- serialization
    def to_json(self) -> dict:
        items = sorted(self.terms.items())
        return {
            "nvars": self.nvars,
            "terms": [[list(e), scalar_str(c)] for e, c in items],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, data) -> "Poly":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(int(data["nvars"]), {tuple(e): parse_scalar(c) for e, c in data["terms"]})


def monomials(nvars: int, degree: int) -> list[tuple]:
    """All exponent tuples of total degree ``degree`` in lexicographic order."""
    out = []
    for combo in combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return sorted(out, reverse=True)


def count_monomials(nvars: int, degree: int) -> int:
    return comb(nvars + degree - 1, degree)


class MonomialIndex:
    """Bijection between exponent tuples of one degree and column indices."""

    def __init__(self, nvars: int, degree: int):
        self.nvars = nvars
        self.degree = degree
        self.exps = monomials(nvars, degree)
        self.index = {e: i for i, e in enumerate(self.exps)}

    def __len__(self):
        return len(self.exps)

    def vector(self, p: Poly) -> dict:
        idx = self.index
        return {idx[e]: c for e, c in p.terms.items()}

    def poly(self, vec) -> Poly:
        if isinstance(vec, dict):
            return Poly(self.nvars, {self.exps[i]: c for i, c in vec.items()})
        return Poly(self.nvars, {self.exps[i]: c for i, c in enumerate(vec) if c != 0})
