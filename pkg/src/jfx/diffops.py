"""Polynomial differential operators: gradients, Bessel operators, co(V) and its model actions.

A :class:`DiffOp` is a finite sum of polynomial coefficients times monomial
partial derivatives in the algebra coordinates. Composition is exact
(Leibniz rule), so Lie brackets of operators can be compared symbolically.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from math import comb
from functools import lru_cache

import numpy as np
from gmpy2 import mpq

from . import errors
from .exact import ONE, ZERO, I, Echelon, conj, exact_array, eye, mat_inv, mat_is_zero, mat_trace, zeros
from .jordan import Algebra
from .poly import MonomialIndex, Poly, monomials
from .polyengine import check_wallach


def _multi_binom(alpha, gamma) -> int:
    out = 1
    for a, g in zip(alpha, gamma):
        out *= comb(a, g)
    return out


def _sub_indices(alpha):
    """All multi-indices gamma <= alpha."""
    out = [()]
    for a in alpha:
        out = [g + (k,) for g in out for k in range(a + 1)]
    return out


class DiffOp:
    """sum_alpha c_alpha(z) d^alpha with Poly coefficients; immutable."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: dict | None = None):
        self.nvars = nvars
        self.terms = {}
        for alpha, c in (terms or {}).items():
            if not c.is_zero():
                self.terms[tuple(alpha)] = c

    # ------------------------------------------------------------ builders
    @classmethod
    def zero(cls, n):
        return cls(n)

    @classmethod
    def mult(cls, p: Poly):
        return cls(p.nvars, {(0,) * p.nvars: p})

    @classmethod
    def const(cls, n, c):
        return cls.mult(Poly.const(n, c))

    @classmethod
    def partial(cls, n, i, coeff: Poly | None = None):
        alpha = [0] * n
        alpha[i] = 1
        return cls(n, {tuple(alpha): coeff if coeff is not None else Poly.const(n, ONE)})

    @classmethod
    def vector_field(cls, comps: list[Poly]):
        """sum_a comps[a] d_a."""
        n = len(comps)
        out = {}
        for a, c in enumerate(comps):
            alpha = [0] * n
            alpha[a] = 1
            out[tuple(alpha)] = c
        return cls(n, out)

    # ------------------------------------------------------------ algebra
    def __repr__(self):
        return f"DiffOp(order={self.order}, terms={len(self.terms)})"

    @property
    def order(self) -> int:
        return max((sum(a) for a in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, DiffOp) and self.nvars == other.nvars and self.terms == other.terms

    __hash__ = None

    def __add__(self, other: "DiffOp") -> "DiffOp":
        t = dict(self.terms)
        for a, c in other.terms.items():
            s = t.get(a)
            s = c if s is None else s + c
            if s.is_zero():
                t.pop(a, None)
            else:
                t[a] = s
        op = DiffOp.__new__(DiffOp)
        op.nvars, op.terms = self.nvars, t
        return op

    def __neg__(self):
        return DiffOp(self.nvars, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "DiffOp":
        if s == 0:
            return DiffOp(self.nvars)
        return DiffOp(self.nvars, {a: c.scale(s) for a, c in self.terms.items()})

    def left_mul(self, p: Poly) -> "DiffOp":
        return DiffOp(self.nvars, {a: p * c for a, c in self.terms.items()})

    def compose(self, other: "DiffOp") -> "DiffOp":
        """self o other by the Leibniz rule."""
        out: dict = {}
        for alpha, ca in self.terms.items():
            subs = _sub_indices(alpha)
            for beta, cb in other.terms.items():
                for gamma in subs:
                    d = cb.diff_multi(gamma)
                    if d.is_zero():
                        continue
                    coeff = ca * d
                    b = _multi_binom(alpha, gamma)
                    if b != 1:
                        coeff = coeff.scale(b)
                    key = tuple(a - g + bb for a, g, bb in zip(alpha, gamma, beta))
                    prev = out.get(key)
                    out[key] = coeff if prev is None else prev + coeff
        return DiffOp(self.nvars, out)

    __matmul__ = compose

    def commutator(self, other: "DiffOp") -> "DiffOp":
        return self.compose(other) - other.compose(self)

    def apply(self, p: Poly) -> Poly:
        out = Poly.zero(self.nvars)
        for alpha, c in self.terms.items():
            d = p.diff_multi(alpha)
            if not d.is_zero():
                out = out + c * d
        return out

    __call__ = apply

    def twist(self, t) -> "DiffOp":
        """e^{(t.z)} o self o e^{-(t.z)}, i.e. d_a -> d_a - t_a."""
        out = DiffOp(self.nvars)
        n = self.nvars
        for alpha, c in self.terms.items():
            for gamma in _sub_indices(alpha):
                f = _multi_binom(alpha, gamma)
                for a in range(n):
                    k = alpha[a] - gamma[a]
                    if k:
                        f = f * (-t[a]) ** k
                if f == 0:
                    continue
                out = out + DiffOp(n, {gamma: c.scale(f)})
        return out

    def coefficients(self) -> list[Poly]:
        return list(self.terms.values())

    # --------------------------------------------------------- serialization
    def to_json(self) -> dict:
        return {
            "nvars": self.nvars,
            "terms": [[list(a), c.to_json()] for a, c in sorted(self.terms.items())],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, data) -> "DiffOp":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(int(data["nvars"]), {tuple(a): Poly.from_json(c) for a, c in data["terms"]})


# ---------------------------------------------------------------- gradients

def coord_polys(alg: Algebra) -> list[Poly]:
    return [Poly.var(alg.n, a) for a in range(alg.n)]


def linear_form(alg: Algebra, u) -> Poly:
    """The polynomial x -> (u|x)."""
    g = exact_array(list(u)) if not isinstance(u, np.ndarray) else u
    return Poly.linear(list(alg.gram.dot(g)))


def gradient(alg: Algebra) -> list[DiffOp]:
    """Coordinate components of d/dx, dual basis taken for the trace form."""
    n = alg.n
    comps = []
    for c in range(n):
        op = DiffOp(n)
        for a in range(n):
            if alg.gram_inv[a, c] != 0:
                op = op + DiffOp.partial(n, a, Poly.const(n, alg.gram_inv[a, c]))
        comps.append(op)
    return comps


def directional(alg: Algebra, a) -> DiffOp:
    """d_a = (a | d/dx)."""
    n = alg.n
    op = DiffOp(n)
    for i in range(n):
        if a[i] != 0:
            op = op + DiffOp.partial(n, i, Poly.const(n, a[i]))
    return op


def vector_field_op(alg: Algebra, T) -> DiffOp:
    """d_{Tx}: derivative along the linear vector field x -> T x."""
    n = alg.n
    comps = [Poly.linear([T[a, b] for b in range(n)]) for a in range(n)]
    return DiffOp.vector_field(comps)


# ------------------------------------------------------------ Bessel operator

_BESSEL_CACHE: dict = {}
_BESSEL_LOCK = threading.Lock()


def _dual_basis(alg: Algebra) -> list:
    return [alg.gram_inv[a, :].copy() for a in range(alg.n)]


def _bessel_second_order(alg: Algebra) -> list[DiffOp]:
    """Components of P(d/dx) x."""
    key = (alg.name, "second")
    if key in _BESSEL_CACHE:
        return _BESSEL_CACHE[key]
    n = alg.n
    duals = _dual_basis(alg)
    terms = [dict() for _ in range(n)]
    for a in range(n):
        for b in range(a, n):
            P = alg.pmat2(duals[a], duals[b])
            mult = 1 if a == b else 2
            alpha = [0] * n
            alpha[a] += 1
            alpha[b] += 1
            alpha = tuple(alpha)
            for c in range(n):
                row = [P[c, j] * mult for j in range(n)]
                if any(v != 0 for v in row):
                    terms[c][alpha] = Poly.linear(row)
    ops = [DiffOp(n, t) for t in terms]
    with _BESSEL_LOCK:
        _BESSEL_CACHE[key] = ops
    return ops


def bessel_op(alg: Algebra, lam) -> list[DiffOp]:
    """Coordinate components of B_lam = P(d/dx) x + lam d/dx."""
    second = _bessel_second_order(alg)
    grad = gradient(alg)
    return [s + g.scale(lam) for s, g in zip(second, grad)]


def bessel_pair(alg: Algebra, v, lam) -> DiffOp:
    """The scalar operator (v | B_lam)."""
    comps = bessel_op(alg, lam)
    w = alg.gram.dot(v if isinstance(v, np.ndarray) else exact_array(list(v)))
    out = DiffOp(alg.n)
    for c in range(alg.n):
        if w[c] != 0:
            out = out + comps[c].scale(w[c])
    return out


def apply_vector(ops: list[DiffOp], p: Poly) -> list[Poly]:
    return [op.apply(p) for op in ops]


def twisted_by_trace(alg: Algebra, op: DiffOp) -> DiffOp:
    """e^{tr} o op o e^{-tr}: the operator acting on P(V) e^{-tr} written on P(V)."""
    return op.twist(list(alg.tr_vec))


def product_rule_defect(alg: Algebra, lam, f: Poly, g: Poly) -> list[Poly]:
    """B(fg) - (Bf)g - 2P(df, dg)x - f Bg, componentwise (zero when the rule holds)."""
    B = bessel_op(alg, lam)
    n = alg.n
    gf = [sum((Poly.const(n, alg.gram_inv[a, c]) * f.diff(a) for a in range(n)), Poly.zero(n)) for c in range(n)]
    gg = [sum((Poly.const(n, alg.gram_inv[a, c]) * g.diff(a) for a in range(n)), Poly.zero(n)) for c in range(n)]
    x = np.array(coord_polys(alg), dtype=object)
    # P(u, w) x = u(w x) + w(u x) - (u w) x for polynomial-valued u, w
    ua, wa = np.array(gf, dtype=object), np.array(gg, dtype=object)
    pux = alg.mul(ua, alg.mul(wa, x)) + alg.mul(wa, alg.mul(ua, x)) - alg.mul(alg.mul(ua, wa), x)
    fg = f * g
    out = []
    for c in range(n):
        lhs = B[c].apply(fg)
        rhs = B[c].apply(f) * g + _as_poly(pux[c], n).scale(2) + f * B[c].apply(g)
        out.append(lhs - rhs)
    return out


def _as_poly(v, n) -> Poly:
    return v if isinstance(v, Poly) else Poly.const(n, v)


def equivariance_check(alg: Algebra, g, lam, p: Poly) -> bool:
    """l(g) B l(g^{-1}) p == g^# B p exactly, for g in Str(V)."""
    if not alg.is_structure_element(g):
        raise errors.NotStructureElement("g does not preserve the quadratic representation")
    n = alg.n
    ginv = mat_inv(g)
    B = bessel_op(alg, lam)
    q = p.linear_substitute(g)          # l(g^{-1}) p = p(g x)
    lhs = [B[c].apply(q).linear_substitute(ginv) for c in range(n)]
    Bp = [B[c].apply(p) for c in range(n)]
    gs = alg.adjoint(g)
    rhs = []
    for c in range(n):
        acc = Poly.zero(n)
        for j in range(n):
            if gs[c, j] != 0:
                acc = acc + Bp[j].scale(gs[c, j])
        rhs.append(acc)
    return all(a == b for a, b in zip(lhs, rhs))


# ------------------------------------------------------------ radial forms

def bessel_radial(r: int, d, lam, which: str = "V"):
    """The r coupled radial operators as a callable on sympy expressions in a_1..a_r.

    Returns (symbols, apply) where apply(F) gives the list of the r components.
    """
    import sympy

    a = sympy.symbols(f"a1:{r + 1}")
    d = sympy.Rational(d) if not isinstance(d, sympy.Basic) else d
    lam = sympy.nsimplify(lam) if not isinstance(lam, sympy.Basic) else lam
    half_d = d / 2

    def apply(F):
        comps = []
        for i in range(r):
            ai = a[i]
            if which == "V":
                expr = ai * sympy.diff(F, ai, 2) + (lam - (r - 1) * half_d) * sympy.diff(F, ai)
                for j in range(r):
                    if j != i:
                        expr += half_d * (ai * sympy.diff(F, ai) - a[j] * sympy.diff(F, a[j])) / (ai - a[j])
            elif which == "W":
                expr = ai * sympy.diff(F, ai, 2) + (2 * lam - 1 - (r - 1) * d) * sympy.diff(F, ai)
                for j in range(r):
                    if j != i:
                        expr += half_d * (1 / (ai - a[j]) + 1 / (ai + a[j])) * (
                            ai * sympy.diff(F, ai) - a[j] * sympy.diff(F, a[j]))
                expr = expr / 4
            else:
                raise ValueError("which must be 'V' or 'W'")
            comps.append(sympy.cancel(sympy.together(expr)))
        return comps

    return a, apply


def frame_components(alg: Algebra, vec) -> list:
    """y_i with vec = sum_i y_i c_i for vec in the span of the frame."""
    return [alg.inner(vec, c) for c in alg.frame]


# ----------------------------------------------------------------- co(V)

@dataclass(frozen=True)
class CoElement:
    """X = (u, T, v) in n + str(V) + nbar, possibly complexified."""

    u: np.ndarray
    T: np.ndarray
    v: np.ndarray

    def __add__(self, o):
        return CoElement(self.u + o.u, self.T + o.T, self.v + o.v)

    def __sub__(self, o):
        return CoElement(self.u - o.u, self.T - o.T, self.v - o.v)

    def scale(self, s):
        return CoElement(self.u * s, self.T * s, self.v * s)

    def equals(self, o) -> bool:
        return (all(a == b for a, b in zip(self.u, o.u)) and all(a == b for a, b in zip(self.v, o.v))
                and mat_is_zero(self.T - o.T))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.u) and all(a == 0 for a in self.v) and mat_is_zero(self.T)

    def is_real(self) -> bool:
        from .exact import QI

        vals = list(self.u) + list(self.v) + list(self.T.reshape(-1))
        return not any(isinstance(x, QI) for x in vals)


def co_element(alg: Algebra, u=None, T=None, v=None) -> CoElement:
    n = alg.n
    u = alg.zero() if u is None else (u if isinstance(u, np.ndarray) else exact_array(list(u)))
    v = alg.zero() if v is None else (v if isinstance(v, np.ndarray) else exact_array(list(v)))
    T = zeros(n) if T is None else T
    return CoElement(u.copy(), T.copy(), v.copy())


def co_bracket(alg: Algebra, X: CoElement, Y: CoElement) -> CoElement:
    u = X.T.dot(Y.u) - Y.T.dot(X.u)
    T = X.T.dot(Y.T) - Y.T.dot(X.T) + alg.box(X.u, Y.v) * 2 - alg.box(Y.u, X.v) * 2
    v = -alg.adjoint(X.T).dot(Y.v) + alg.adjoint(Y.T).dot(X.v)
    return CoElement(u, T, v)


def split_structure(alg: Algebra, T) -> tuple:
    """T = D + L(a) with a = T e and D a derivation."""
    a = T.dot(alg.unit)
    return T - alg.lmat(a), a


def cartan_theta(alg: Algebra, X: CoElement) -> CoElement:
    D, a = split_structure(alg, X.T)
    return CoElement(-X.v, D - alg.lmat(a), -X.u)


def cayley(alg: Algebra, X: CoElement) -> CoElement:
    """Linear extension of the three displayed images of n, str(V) and nbar."""
    quarter = mpq(1, 4)
    D, a = split_structure(alg, X.T)
    u = X.u * quarter + a * (I * quarter) + X.v * quarter
    T = alg.lmat(X.u) * I + D - alg.lmat(X.v) * I
    v = X.u - a * I + X.v
    return CoElement(u, T, v)


def co_basis(alg: Algebra) -> list[CoElement]:
    """(e_a,0,0), (0,T_j,0), (0,0,e_a) with T_j a rational basis of str(V)."""
    out = []
    for a in range(alg.n):
        out.append(co_element(alg, u=alg._basis(a)))
    for T in alg.str_basis:
        out.append(co_element(alg, T=T))
    for a in range(alg.n):
        out.append(co_element(alg, v=alg._basis(a)))
    return out


# ------------------------------------------------------------ model actions

def dpiC(alg: Algebra, lam, X: CoElement) -> DiffOp:
    """Holomorphic Schroedinger-model action on polynomials in the complex coordinates."""
    check_wallach(alg, lam)
    n = alg.n
    op = DiffOp(n)
    if any(c != 0 for c in X.u):
        op = op + DiffOp.mult(linear_form(alg, X.u).scale(I))
    if not mat_is_zero(X.T):
        Ts = alg.adjoint(X.T)
        op = op + vector_field_op(alg, Ts)
        const = mat_trace(Ts) * mpq(alg.r, 2 * n) * lam
        if const != 0:
            op = op + DiffOp.const(n, const)
    if any(c != 0 for c in X.v):
        op = op + bessel_pair(alg, X.v, lam).scale(I)
    return op


def dpi(alg: Algebra, lam, X: CoElement) -> DiffOp:
    """Schroedinger-model action of a real X on polynomials (restrictions to the orbit)."""
    if not X.is_real():
        raise ValueError("dpi takes a real element; use dpiC for complex ones")
    return dpiC(alg, lam, X)


def drho(alg: Algebra, lam, X: CoElement) -> DiffOp:
    """Fock-model action: dpiC composed with the Cayley type transform."""
    return dpiC(alg, lam, cayley(alg, X))


# ------------------------------------------------------------- orbit ideals

class OrbitIdeal:
    """Vanishing ideal of the closure of the rank <= k complex orbit X_k.

    Normal forms are computed degree by degree: the degree-D part of the
    ideal is the span of monomial multiples of the homogeneous generators,
    kept as a fully reduced echelon basis over Q.
    """

    def __init__(self, alg: Algebra, k: int):
        if not 0 <= k <= alg.r:
            raise ValueError("orbit index out of range")
        self.alg = alg
        self.k = k
        self.generators = alg.orbit_ideal_generators(k)
        self._deg: dict = {}
        self._lock = threading.Lock()

    def _part(self, D: int):
        part = self._deg.get(D)
        if part is not None:
            return part
        n = self.alg.n
        idx = MonomialIndex(n, D)
        ech = Echelon(full=True)
        for g in self.generators:
            gd = g.degree
            if gd > D:
                continue
            for mono in monomials(n, D - gd):
                m = Poly.monomial(mono)
                ech.add(idx.vector(m * g))
        with self._lock:
            part = self._deg.setdefault(D, (idx, ech))
        return part

    def dim(self, D: int) -> int:
        """Dimension of the degree-D part of the ideal."""
        if self.k == self.alg.r:
            return 0
        return self._part(D)[1].rank

    def _reduce_real(self, p: Poly) -> Poly:
        if self.k == self.alg.r or p.is_zero():
            return p
        if self.k == 0:
            return Poly.const(p.nvars, p.constant_term()) if p.constant_term() != 0 else Poly.zero(p.nvars)
        out = Poly.zero(p.nvars)
        for D, part in p.shells().items():
            idx, ech = self._part(D)
            out = out + idx.poly(ech.reduce(idx.vector(part)))
        return out

    def reduce(self, p: Poly) -> Poly:
        """Canonical representative of p modulo the ideal."""
        re, im = p.real_imag()
        re = self._reduce_real(re)
        im = self._reduce_real(im)
        if im.is_zero():
            return re
        return re + im.scale(I)

    def contains(self, p: Poly) -> bool:
        return self.reduce(p).is_zero()


@lru_cache(maxsize=None)
def orbit_ideal(alg: Algebra, k: int) -> OrbitIdeal:
    return OrbitIdeal(alg, k)


def op_maps_into_ideal(op: DiffOp, ideal: OrbitIdeal | None, test_polys) -> list:
    """Polys from test_polys whose image under op is not in the ideal (or nonzero)."""
    bad = []
    for p in test_polys:
        q = op.apply(p)
        if ideal is None:
            if not q.is_zero():
                bad.append(p)
        elif not ideal.contains(q):
            bad.append(p)
    return bad


@dataclass
class TangentialityReport:
    k: int
    lam: object
    degree_cap: int
    checked: int
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures


def tangentiality_check(alg: Algebra, k: int, degree_cap: int = 4) -> TangentialityReport:
    """Each component of B_{kd/2} maps generator multiples of degree <= cap into the ideal."""
    lam = mpq(k * alg.d, 2)
    ideal = orbit_ideal(alg, k)
    B = bessel_op(alg, lam)
    n = alg.n
    checked = 0
    failures = []
    for g in ideal.generators:
        for D in range(0, degree_cap - g.degree + 1):
            for mono in monomials(n, D):
                p = Poly.monomial(mono) * g
                for c in range(n):
                    checked += 1
                    if not ideal.contains(B[c].apply(p)):
                        failures.append((c, p))
    return TangentialityReport(k, lam, degree_cap, checked, failures)


def commutator_residual(alg: Algebra, lam, a, b) -> DiffOp:
    """[(a|B), (b|B)] as an operator (zero exactly or modulo the orbit ideal)."""
    A = bessel_pair(alg, a, lam)
    Bop = bessel_pair(alg, b, lam)
    return A.commutator(Bop)
