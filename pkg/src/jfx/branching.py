"""The so(2,n) Fock model on the null cone and its restriction to so(2,m) + so(n-m).

Polynomials live in C[Z_1..Z_n] (0-based variables z_0..z_{n-1}); the null
cone model is the quotient by Z_1^2 - Z_2^2 - ... - Z_n^2, reduced to the
normal form of Z_1-degree at most one. Operators are written directly from
the explicit so(2,n) formulas and can be cross-checked against the generic
Jordan construction on the spin factor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb

import numpy as np
from gmpy2 import mpq

from .diffops import DiffOp
from .exact import QI, nullspace
from .poly import Poly, monomials

I = QI(0, 1)


def _eps(j: int) -> int:
    return 1 if j == 0 else -1


# --------------------------------------------------------------- operators

def euler(n: int, start: int = 0, stop: int | None = None) -> DiffOp:
    stop = n if stop is None else stop
    out = DiffOp(n)
    for j in range(start, stop):
        out = out + DiffOp.partial(n, j, Poly.var(n, j))
    return out


def box(n: int, nvars: int | None = None) -> DiffOp:
    """sum_{j < n} eps_j d_j^2 on nvars variables (the wave operator on the first n)."""
    N = n if nvars is None else nvars
    terms = {}
    for j in range(n):
        e = [0] * N
        e[j] = 2
        terms[tuple(e)] = Poly.const(N, mpq(_eps(j)))
    return DiffOp(N, terms)


def laplacian(nvars: int, start: int, stop: int) -> DiffOp:
    terms = {}
    for j in range(start, stop):
        e = [0] * nvars
        e[j] = 2
        terms[tuple(e)] = Poly.const(nvars, mpq(1))
    return DiffOp(nvars, terms)


def bessel_component(n: int, j: int, lam, nvars: int | None = None) -> DiffOp:
    """B^{n,j}_lambda = eps_j z_j box^n - 2 (E^n + lambda) d_j, on the first n of nvars variables."""
    N = n if nvars is None else nvars
    first = box(n, N).left_mul(Poly.var(N, j).scale(mpq(_eps(j))))
    E = euler(N, 0, n) + DiffOp.const(N, mpq(lam))
    second = E.compose(DiffOp.partial(N, j)).scale(mpq(-2))
    return first + second


def _jordan_field(a, n: int, N: int) -> list[Poly]:
    """Components of z -> a z in the spin factor R^{1,n-1} (first n variables)."""
    comps = [Poly.zero(N) for _ in range(N)]
    comps[0] = Poly.linear([a[0]] + [a[j] for j in range(1, n)] + [0] * (N - n))
    for j in range(1, n):
        lin = [0] * N
        lin[0] = a[j]
        lin[j] = a[0]
        comps[j] = Poly.linear(lin)
    return comps


@dataclass(frozen=True)
class SOElement:
    """One of the four generating families of so(2,n)_C.

    kind: "n" for (a, -2iL(a), a), "center" for (a, 0, -a), "nbar" for
    (a, 2iL(a), a) and "rot" for (0, D, 0) with D skew on coordinates 2..n.
    """

    kind: str
    a: tuple = ()
    D: tuple = ()


def rho_so(n: int, lam, X: SOElement, nvars: int | None = None) -> DiffOp:
    """d rho_lambda^{so(2,n)}(X) acting on the first n of nvars variables."""
    N = n if nvars is None else nvars
    lam = mpq(lam)
    if X.kind == "n":
        return DiffOp.mult(Poly.linear([I * a for a in X.a[:n]] + [0] * (N - n)).scale(2))
    if X.kind == "center":
        op = DiffOp.vector_field(_jordan_field(X.a, n, N))
        tr = 2 * X.a[0]
        return (op + DiffOp.const(N, lam / 2 * tr)).scale(2 * I)
    if X.kind == "nbar":
        out = DiffOp(N)
        for j in range(n):
            if X.a[j] != 0:
                out = out + bessel_component(n, j, lam, N).scale(X.a[j])
        return out.scale(-2 * I)
    if X.kind == "rot":
        D = np.asarray(X.D, dtype=object)
        comps = [Poly.zero(N) for _ in range(N)]
        for i in range(n):
            comps[i] = Poly.linear([D[i, j] if j < n else 0 for j in range(N)])
        return DiffOp.vector_field(comps).scale(-1)
    raise ValueError(f"unknown element kind {X.kind!r}")


def subalgebra_elements(m: int) -> list[SOElement]:
    """A spanning set of so(2,m)_C: the three a-families on e_1..e_m and so(m-1) rotations."""
    out = []
    for kind in ("n", "center", "nbar"):
        for j in range(m):
            a = [mpq(0)] * m
            a[j] = mpq(1)
            out.append(SOElement(kind, tuple(a)))
    for i in range(1, m):
        for j in range(i + 1, m):
            D = np.zeros((m, m), dtype=object)
            D[:, :] = mpq(0)
            D[i, j] = mpq(1)
            D[j, i] = mpq(-1)
            out.append(SOElement("rot", D=tuple(map(tuple, D))))
    return out


def embed(X: SOElement, n: int) -> SOElement:
    """The same element viewed in so(2,n) (padding a and D with zeros)."""
    if X.kind == "rot":
        m = len(X.D)
        D = [[X.D[i][j] if i < m and j < m else mpq(0) for j in range(n)] for i in range(n)]
        return SOElement("rot", D=tuple(map(tuple, D)))
    return SOElement(X.kind, tuple(X.a) + (mpq(0),) * (n - len(X.a)))


def generic_element(alg, X: SOElement):
    """The co(V) element of the spin factor matching X, for the cross-check against drho."""
    from .diffops import co_element
    from .exact import exact_array

    n = alg.n
    if X.kind == "rot":
        return co_element(alg, T=exact_array([list(r) for r in X.D]))
    a = exact_array(list(X.a) + [mpq(0)] * (n - len(X.a)))
    L = alg.lmat(a)
    if X.kind == "n":
        return co_element(alg, u=a, T=L * (-2 * I), v=a)
    if X.kind == "center":
        return co_element(alg, u=a, v=-a)
    return co_element(alg, u=a, T=L * (2 * I), v=a)


# ------------------------------------------------------------- quotient ring

@dataclass
class NullConeModel:
    """C[Z_1..Z_n]/(Z_1^2 - Z_2^2 - ... - Z_n^2) with lambda = (n-2)/2."""

    n: int
    lam: object = field(init=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("the null cone model needs n >= 2")
        self.lam = mpq(self.n - 2, 2)

    def reduce(self, p: Poly) -> Poly:
        """Normal form: substitute Z_1^2 -> Z_2^2 + ... + Z_n^2 until Z_1-degree <= 1."""
        n = self.n
        out: dict = {}
        stack = list(p.terms.items())
        while stack:
            e, c = stack.pop()
            if e[0] < 2:
                out[e] = out.get(e, 0) + c
                continue
            for j in range(1, n):
                f = list(e)
                f[0] -= 2
                f[j] += 2
                stack.append((tuple(f), c))
        return Poly(n, out)

    def normal_monomials(self, degree: int) -> list[tuple]:
        return [e for e in monomials(self.n, degree) if e[0] <= 1]

    def graded_dim(self, degree: int) -> int:
        """Number of normal-form monomials of the given degree."""
        return len(self.normal_monomials(degree))

    def graded_dim_formula(self, degree: int) -> int:
        """dim C[Z]_l - dim C[Z]_{l-2}."""
        n = self.n
        full = comb(degree + n - 1, n - 1)
        return full - (comb(degree - 2 + n - 1, n - 1) if degree >= 2 else 0)

    def rho(self, X: SOElement) -> DiffOp:
        return rho_so(self.n, self.lam, X)


# ------------------------------------------------------------- harmonics

@dataclass
class HarmonicBlock:
    k: int
    nvars: int
    start: int
    basis: list

    @property
    def dim(self) -> int:
        return len(self.basis)


def harmonic_dim(p: int, k: int) -> int:
    """dim H^k(C^p)."""
    if p == 1:
        return 1 if k <= 1 else 0
    return comb(k + p - 1, p - 1) - (comb(k + p - 3, p - 1) if k >= 2 else 0)


def harmonic_basis(p: int, k: int, nvars: int | None = None, start: int = 0) -> HarmonicBlock:
    """Basis of the degree-k harmonic polynomials in variables start..start+p-1 (kernel of the Laplacian)."""
    if p < 1:
        raise ValueError("need at least one variable")
    N = p if nvars is None else nvars
    lap = laplacian(N, start, start + p)

    def lift(e):
        f = [0] * N
        f[start:start + p] = e
        return tuple(f)

    mons = [lift(e) for e in monomials(p, k)]
    cols = [lap.apply(Poly.monomial(e)).terms for e in mons]
    basis = []
    for vec in nullspace(cols):
        basis.append(Poly(N, {e: c for e, c in zip(mons, vec) if c != 0}))
    return HarmonicBlock(k, N, start, basis)


# ------------------------------------------------------------ decomposition

@dataclass
class DegreeReport:
    degree: int
    quotient_dim: int
    formula_dim: int
    block_dims: dict
    span_rank: int

    @property
    def ok(self) -> bool:
        total = sum(self.block_dims.values())
        return self.quotient_dim == self.formula_dim == total == self.span_rank

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "quotient_dim": self.quotient_dim,
            "formula_dim": self.formula_dim,
            "block_dims": {str(k): v for k, v in sorted(self.block_dims.items())},
            "span_rank": self.span_rank,
            "ok": self.ok,
        }


def _rank(polys: list[Poly]) -> int:
    from .exact import Echelon

    ech = Echelon()
    for p in polys:
        ech.add(dict(p.terms))
    return ech.rank


def block_spanning_set(model: NullConeModel, m: int, k: int, degree: int) -> list[Poly]:
    """f h with f a monomial in Z_1..Z_m of degree (degree - k) and h in H^k(C^{n-m})."""
    n = model.n
    H = harmonic_basis(n - m, k, n, m)
    out = []
    for e in monomials(m, degree - k):
        f = Poly.monomial(tuple(e) + (0,) * (n - m))
        for h in H.basis:
            out.append(f * h)
    return out


def decompose(model: NullConeModel, m: int, cap: int) -> list[DegreeReport]:
    """Graded dimension bookkeeping of the quotient against sum_k C[Z_1..Z_m]_{l-k} x H^k.

    ``span_rank`` is the rank of all block spanning sets of degree l after
    reduction, an independent check that the blocks fill the quotient.
    """
    n = model.n
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    out = []
    for deg in range(cap + 1):
        dims = {}
        polys = []
        for k in range(deg + 1):
            h = harmonic_dim(n - m, k)
            if h == 0:
                continue
            dims[k] = comb(deg - k + m - 1, m - 1) * h
            polys.extend(model.reduce(p) for p in block_spanning_set(model, m, k, deg))
        out.append(DegreeReport(deg, model.graded_dim(deg), model.graded_dim_formula(deg), dims, _rank(polys)))
    return out


# ------------------------------------------------------ operator identity

@dataclass
class BranchingResidual:
    n: int
    m: int
    k: int
    element: SOElement
    checked: int
    nonzero: int

    @property
    def ok(self) -> bool:
        return self.nonzero == 0

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "k": self.k, "kind": self.element.kind,
                "checked": self.checked, "nonzero": self.nonzero, "ok": self.ok}


def branching_operator_check(n: int, m: int, k: int, X: SOElement, cap: int) -> BranchingResidual:
    """d rho^{so(2,n)}_lambda(X) (f h) - (d rho^{so(2,m)}_{lambda+k}(X) f) h, reduced, for deg(f h) <= cap."""
    model = NullConeModel(n)
    big = model.rho(embed(X, n))
    small = rho_so(m, model.lam + k, X, nvars=n)
    H = harmonic_basis(n - m, k, n, m)
    checked = nonzero = 0
    for deg in range(k, cap + 1):
        for e in monomials(m, deg - k):
            f = Poly.monomial(tuple(e) + (0,) * (n - m))
            sf = small.apply(f)
            for h in H.basis:
                res = model.reduce(big.apply(f * h) - sf * h)
                checked += 1
                if not res.is_zero():
                    nonzero += 1
    return BranchingResidual(n, m, k, X, checked, nonzero)


def theorem_check(n: int, cap: int = 4, kmax: int = 3) -> dict:
    """Graded decomposition and the operator identity for every split 1 <= m < n."""
    model = NullConeModel(n)
    report = {"n": n, "lambda": str(model.lam), "splits": []}
    for m in range(1, n):
        degrees = decompose(model, m, cap)
        residuals = [branching_operator_check(n, m, k, X, cap)
                     for k in range(min(kmax, cap) + 1) for X in subalgebra_elements(m)]
        report["splits"].append({
            "m": m,
            "degrees": [d.to_json() for d in degrees],
            "residuals": [r.to_json() for r in residuals],
            "ok": all(d.ok for d in degrees) and all(r.ok for r in residuals),
        })
    report["ok"] = all(s["ok"] for s in report["splits"])
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True)
