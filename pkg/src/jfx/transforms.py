"""Fock space pairings, the Segal-Bargmann transform and the inversion operator.

Exact routes work on K-finite vectors. A Schroedinger-side vector p e^{-tr}
is stored through p; spherical vectors are kept as coefficients on the
Laguerre functions ell_m(x) = e^{-tr x} L_m(2x). Fock-side vectors are
polynomials, with spherical ones kept as coefficients on Phi_m.

Numeric routes integrate the Bessel kernels against mu_lambda (rank <= 2)
or, for the inverse transform, against nu_lambda.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from math import factorial

import numpy as np
from gmpy2 import mpq

from . import errors
from .bessel import DEFAULT_CONFIG, BesselSeriesConfig, FactoredPoint, bessel_I, bessel_J, kernel_many, omega_radial
from .diffops import OrbitIdeal, bessel_op, cayley, dpiC, twisted_by_trace
from .exact import QI, conj, to_complex
from .jordan import Algebra
from .poly import Poly
from .polyengine import Partition, as_partition, check_wallach, engine, partitions_upto, pochhammer
from .quadrature import ComplexOrbitMeasure, OrbitMeasure, c_lambda, orbit_measure

SCHRODINGER = "schrodinger"
FOCK = "fock"


# ------------------------------------------------------------ domain types

@dataclass(frozen=True)
class WallachPoint:
    lam: object
    kind: str
    k: int

    @classmethod
    def of(cls, alg: Algebra, lam) -> "WallachPoint":
        k = check_wallach(alg, lam)
        if k is None:
            return cls(lam, "continuous", alg.r)
        return cls(lam, "discrete", k)

    @property
    def is_discrete(self) -> bool:
        return self.kind == "discrete"


@dataclass
class KFiniteVector:
    """A finitely supported vector in either model.

    ``spherical`` maps partitions to scalars (on ell_m or Phi_m); ``extra`` is
    an optional polynomial part (p for p e^{-tr}, or a Fock polynomial).
    """

    side: str
    spherical: dict = field(default_factory=dict)
    extra: Poly | None = None

    def __post_init__(self):
        if self.side not in (SCHRODINGER, FOCK):
            raise ValueError(f"unknown side {self.side!r}")

    @property
    def is_spherical(self) -> bool:
        return self.extra is None or self.extra.is_zero()

    def to_poly(self, alg: Algebra, lam) -> Poly:
        """p with vector p e^{-tr} (Schroedinger) or the Fock polynomial."""
        out = Poly.zero(alg.n) if self.extra is None else self.extra
        for m, c in self.spherical.items():
            base = laguerre_vector_poly(alg, lam, m) if self.side == SCHRODINGER else engine(alg).spherical_phi(m)
            out = out + base.scale(c)
        return out


def laguerre_vector_poly(alg: Algebra, lam, m) -> Poly:
    """L_m^lam(2x), so that ell_m^lam = L_m^lam(2x) e^{-tr x}."""
    two = np.empty((alg.n, alg.n), dtype=object)
    for i in range(alg.n):
        for j in range(alg.n):
            two[i, j] = mpq(2) if i == j else mpq(0)
    return engine(alg).laguerre_poly(m, lam).linear_substitute(two)


def _admissible(alg: Algebra, lam, m: Partition) -> bool:
    return pochhammer(lam, m, alg.d) != 0


# ------------------------------------------------------------- norm formulas

def fock_norm_sq(alg: Algebra, lam, m):
    """||Phi_m||^2 in F_lambda: 4^|m| (n/r)_m (lambda)_m / d_m."""
    m = as_partition(alg, m)
    return mpq(4) ** m.weight * schrodinger_norm_sq(alg, lam, m)


def schrodinger_norm_sq(alg: Algebra, lam, m):
    """||ell_m||^2 in L^2(O_lambda, mu_lambda): (n/r)_m (lambda)_m / d_m."""
    m = as_partition(alg, m)
    d = alg.d
    return pochhammer(mpq(alg.n, alg.r), m, d) * pochhammer(lam, m, d) / engine(alg).d_m(m)


def hardy_norm_sq(alg: Algebra, lam, m):
    """||Phi_m||^2 in the weighted Bergman/Hardy space on D: (n/r)_m / (d_m (lambda)_m)."""
    m = as_partition(alg, m)
    pl = pochhammer(lam, m, alg.d)
    if pl == 0:
        raise errors.RankMismatch(f"m={m} is not admissible at lambda={lam}")
    return pochhammer(mpq(alg.n, alg.r), m, alg.d) / (engine(alg).d_m(m) * pl)


# ------------------------------------------------------ Bessel-Fischer form

def _exact_scalar(x):
    if isinstance(x, QI) and x.im == 0:
        return x.re
    return x


def bessel_fischer(alg: Algebra, lam, p: Poly, q: Poly):
    """[p, q]_lambda = p(B_lambda) qbar(4z) at z = 0, exactly.

    p(B_lambda) substitutes the coordinate components of B_lambda for the
    coordinates; they commute, so each monomial is applied once along a
    memoized chain.
    """
    check_wallach(alg, lam)
    ops = bessel_op(alg, lam)
    n = alg.n
    total = mpq(0)
    qs = q.shells()
    for D, pD in p.shells().items():
        qD = qs.get(D)
        if qD is None or qD.is_zero():
            continue
        memo = {(0,) * n: qD.conj_coeffs().scale(mpq(4) ** D)}

        def power(alpha):
            if alpha in memo:
                return memo[alpha]
            i = next(a for a in range(n) if alpha[a])
            prev = list(alpha)
            prev[i] -= 1
            val = ops[i].apply(power(tuple(prev)))
            memo[alpha] = val
            return val

        for alpha, c in sorted(pD.terms.items()):
            total = total + c * power(alpha).constant_term()
    return _exact_scalar(total)


def fischer_fock_norm(alg: Algebra, lam, m):
    """[Phi_m, Phi_m]_lambda together with the closed form."""
    phi = engine(alg).spherical_phi(m)
    return bessel_fischer(alg, lam, phi, phi), fock_norm_sq(alg, lam, m)


# ------------------------------------------------------- reproducing kernel

def fock_kernel(alg: Algebra, lam, z, w: FactoredPoint, cfg: BesselSeriesConfig = DEFAULT_CONFIG) -> complex:
    """K_lambda(z, w) = I_lambda(z/2, w/2)."""
    half = FactoredPoint(w.u, np.asarray(w.a, dtype=float) / 2)
    return bessel_I(alg, lam, np.asarray(z, dtype=complex) / 2, half, cfg).value


def fock_kernel_component(alg: Algebra, lam, m, b_exact) -> Poly:
    """z -> K^m_lambda(z, w) for w = b^2 with b exact (so P(w^{1/2}) = P(b)).

    d_m / ((n/r)_m (lambda)_m) Phi_m(z/2, w/2) = that constant times
    4^{-|m|} Phi_m(P(b) z).
    """
    m = as_partition(alg, m)
    pl = pochhammer(lam, m, alg.d)
    if pl == 0:
        raise errors.RankMismatch(f"m={m} is not admissible at lambda={lam}")
    eng = engine(alg)
    c = mpq(eng.d_m(m)) / (pochhammer(mpq(alg.n, alg.r), m, alg.d) * pl * mpq(4) ** m.weight)
    return eng.spherical_phi2_poly(m, b_exact).scale(c)


# ------------------------------------------------ Segal-Bargmann transform

def bargmann_kfinite(alg: Algebra, lam, v: KFiniteVector) -> KFiniteVector:
    """ell_m -> (-1/2)^|m| Phi_m coefficientwise."""
    if v.side != SCHRODINGER or not v.is_spherical:
        raise errors.NotSphericalExpansion("closed form needs a Schroedinger-side spherical expansion")
    out = {}
    for m, c in v.spherical.items():
        m = as_partition(alg, m)
        out[m] = c * mpq(-1, 2) ** m.weight
    return KFiniteVector(FOCK, out)


def _htrunc(P: Poly, n: int, D: int) -> Poly:
    return Poly._raw(P.nvars, {e: c for e, c in P.terms.items() if sum(e[n:]) <= D})


def _jmul(alg: Algebra, x: list, y: list) -> list:
    n = alg.n
    N = x[0].nvars
    out = [Poly.zero(N) for _ in range(n)]
    for a in range(n):
        if x[a].is_zero():
            continue
        for b in range(n):
            if y[b].is_zero():
                continue
            xy = None
            for c in range(n):
                s = alg.C[a, b, c]
                if s != 0:
                    xy = x[a] * y[b] if xy is None else xy
                    out[c] = out[c] + xy.scale(s)
    return out


def _binom_neg(lam, j: int):
    out = mpq(1)
    for i in range(j):
        out *= (-lam - i)
    return out / factorial(j)


def bargmann_exact(alg: Algebra, lam, p: Poly) -> Poly:
    """B_lambda(p e^{-tr}) as an exact polynomial, for any polynomial p.

    With the Laplace transform of the I-kernel against mu_lambda,
    B(p e^{-tr})(z) = p(-G^{-1} grad_y)[Delta(y)^{-lam} e^{(z|y^{-1})}] at y = 2e,
    up to 2^{r lam}. Writing y = 2e + h, only h-degree <= deg p matters. At a
    discrete point the result is meaningful modulo the orbit ideal.
    """
    lam = mpq(lam)
    check_wallach(alg, lam)
    n = alg.n
    if p.is_zero():
        return Poly.zero(n)
    D = p.degree
    N = 2 * n
    half = mpq(1, 2)
    u = [Poly.var(N, n + a, half) for a in range(n)]
    one = Poly.const(N, mpq(1))
    # (e + u)^{-1} - e = sum_{j>=1} (-u)^j
    inv = [Poly.zero(N) for _ in range(n)]
    pw = u
    for j in range(1, D + 1):
        sign = mpq(-1) ** j
        inv = [a + b.scale(sign) for a, b in zip(inv, pw)]
        if j < D:
            pw = [_htrunc(c, n, D) for c in _jmul(alg, pw, u)]
    G = alg.gram
    E = Poly.zero(N)
    for a in range(n):
        for b in range(n):
            if G[a, b] != 0 and not inv[b].is_zero():
                E = E + (Poly.var(N, a) * inv[b]).scale(G[a, b] * half)
    shifted = [Poly.const(N, alg.unit[a]) + u[a] for a in range(n)]
    s = alg.det_poly.compose(shifted) - one
    delta = one
    spow = one
    expE = one
    Epow = one
    for j in range(1, D + 1):
        spow = _htrunc(spow * s, n, D)
        delta = delta + spow.scale(_binom_neg(lam, j))
        Epow = _htrunc(Epow * E, n, D)
        expE = expE + Epow.scale(mpq(1, factorial(j)))
    T = _htrunc(delta * expE, n, D)
    Ginv = alg.gram_inv
    q = p.compose([Poly.linear([-Ginv[a, b] for b in range(n)]) for a in range(n)])
    qterms = q.terms
    out: dict = {}
    for e, c in T.terms.items():
        beta = e[n:]
        qc = qterms.get(beta)
        if qc is None:
            continue
        f = 1
        for k in beta:
            f *= factorial(k)
        key = e[:n]
        out[key] = out.get(key, 0) + c * qc * f
    return Poly(n, out)


def bargmann_vector(alg: Algebra, lam, v: KFiniteVector) -> Poly:
    """Fock polynomial of B_lambda v: closed form on spherical parts, exact route otherwise."""
    if v.side != SCHRODINGER:
        raise errors.NotSphericalExpansion("input must be Schroedinger-side")
    out = Poly.zero(alg.n)
    if v.spherical:
        out = bargmann_kfinite(alg, lam, KFiniteVector(SCHRODINGER, v.spherical)).to_poly(alg, lam)
    if not v.is_spherical:
        out = out + bargmann_exact(alg, lam, v.extra)
    return out


def _real_points(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


def bargmann_numeric(alg: Algebra, lam, psi, z, cfg: BesselSeriesConfig = DEFAULT_CONFIG,
                     measure: OrbitMeasure | None = None, zonal: bool = False) -> complex:
    """e^{-tr z/2} int I_lambda(z, x) e^{-tr x} psi(x) d mu_lambda(x) for psi on arrays [P, n].

    ``zonal`` may be set when psi is K^L-invariant and z lies in the complex
    span of the Jordan frame; the group average then collapses to one
    dimension. At a discrete point z must lie on the rank-k complex orbit.
    """
    if alg.r > 2:
        raise errors.RankMismatch("numeric Bargmann transform needs rank <= 2")
    mu = measure if measure is not None else orbit_measure(alg, lam)
    z = np.asarray(z, dtype=complex)
    G = np.asarray(alg.gram_f, dtype=float)
    trv = np.array([float(v) for v in alg.tr_vec])
    detz = complex(alg.det_poly.eval_many(z[None, :])[0])
    Gz = G @ z

    def f(x):
        x = _real_points(x)
        vals = kernel_many(alg, lam, x @ Gz, alg.det_poly.eval_many(x) * detz, 1, cfg, wrank=mu.k)
        return vals * np.exp(-(x @ trv)) * np.asarray(psi(x))

    return complex(np.exp(-(trv @ z) / 2) * mu.integrate(f, zonal=zonal, complex_values=True))


def laguerre_evaluator(alg: Algebra, lam, m):
    """ell_m^lam on coordinate arrays [P, n]."""
    L = laguerre_vector_poly(alg, lam, m)
    trv = np.array([float(v) for v in alg.tr_vec])

    def psi(x):
        x = _real_points(x)
        return L.eval_many(x).real * np.exp(-(x @ trv))

    return psi


def fock_integral_rank1(alg: Algebra, lam, g, ntheta: int = 128, measure: ComplexOrbitMeasure | None = None):
    """(1/c_lambda) int g omega_lambda d nu_lambda on a rank-one algebra, deterministically.

    U is the circle there, so the group average is a trapezoid rule in the
    phase, which converges geometrically for entire integrands.
    """
    if alg.r != 1:
        raise errors.RankMismatch("deterministic nu-integral is rank one only")
    cm = measure if measure is not None else ComplexOrbitMeasure(alg, lam)
    base, wts = cm.radial_nodes(lambda a: omega_radial(alg, lam, a))
    theta = 2 * math.pi * np.arange(ntheta) / ntheta
    phases = np.exp(1j * theta)
    pts = (phases[:, None, None] * base[None, :, :]).reshape(-1, alg.n)
    vals = np.asarray(g(pts)).reshape(ntheta, -1)
    return complex((vals.mean(axis=0) @ wts) / cm.c_lambda)


def bargmann_inverse_numeric(alg: Algebra, lam, F, x, cfg: BesselSeriesConfig = DEFAULT_CONFIG,
                             ntheta: int = 128, measure: ComplexOrbitMeasure | None = None) -> complex:
    """e^{-tr x}/c_lambda int I_lambda(x, zbar) e^{-tr(zbar)/2} F(z) omega_lambda(z) d nu_lambda(z).

    Deterministic on rank one; F takes complex coordinate arrays [P, n].
    """
    x = _real_points(x)
    G = np.asarray(alg.gram_f, dtype=float)
    trv = np.array([float(v) for v in alg.tr_vec])
    Gx = G @ x

    def g(z):
        # the kernel is antiholomorphic in its second slot
        ker = kernel_many(alg, lam, np.conj(z) @ Gx, np.zeros(z.shape[0]), 1, cfg)
        return ker * np.exp(-np.conj(z @ trv) / 2) * np.asarray(F(z))

    return complex(np.exp(-(trv @ x)) * fock_integral_rank1(alg, lam, g, ntheta, measure))


def bounded_domain_numeric(alg: Algebra, lam, F, z, ntheta: int = 128,
                           measure: ComplexOrbitMeasure | None = None) -> complex:
    """A_lambda F(z) = (1/c_lambda) int e^{-(z|wbar)/2} F(w) omega_lambda(w) d nu_lambda(w), rank one."""
    z = np.asarray(z, dtype=complex)
    G = np.asarray(alg.gram_f, dtype=float)

    def g(w):
        return np.exp(-(np.conj(w) @ (G @ z)) / 2) * np.asarray(F(w))

    return fock_integral_rank1(alg, lam, g, ntheta, measure)


# -------------------------------------------------- intertwining property

@dataclass
class IntertwiningReport:
    residual: Poly
    norm: object

    @property
    def ok(self) -> bool:
        return self.residual.is_zero()


def _sq_norm(p: Poly):
    total = mpq(0)
    for c in p.terms.values():
        total += _exact_scalar(c * conj(c))
    return _exact_scalar(total)


def intertwining_residual(alg: Algebra, lam, X, v: KFiniteVector, degree_cap: int = 6) -> IntertwiningReport:
    """B(dpi(X) v) - drho(X) B(v), exactly (modulo the orbit ideal at discrete lambda).

    dpi(X) v is expanded as a polynomial times e^{-tr} and sent through the
    exact Laplace route; B(v) uses the closed form on spherical parts.
    """
    lam = mpq(lam)
    wp = WallachPoint.of(alg, lam)
    p = v.to_poly(alg, lam)
    if p.degree + 1 > degree_cap:
        raise errors.DegreeCapExceeded(f"degree {p.degree + 1} exceeds cap {degree_cap}")
    moved = twisted_by_trace(alg, dpiC(alg, lam, X)).apply(p)
    try:
        lhs = bargmann_exact(alg, lam, moved)
        rhs = dpiC(alg, lam, cayley(alg, X)).apply(bargmann_vector(alg, lam, v))
    except errors.JFXError as exc:
        raise errors.ExpansionFailed(str(exc)) from exc
    res = lhs - rhs
    if wp.is_discrete and wp.k < alg.r:
        res = OrbitIdeal(alg, wp.k).reduce(res)
    return IntertwiningReport(res, _sq_norm(res))


# ---------------------------------------------------- bounded-domain model

def bounded_domain_scalar(alg: Algebra, lam, m):
    """The scalar by which A_lambda acts on P_m: (-2)^|m| (lambda)_m.

    This is the value forced by the integral formula for A_lambda together
    with the Fock norms; it makes |scalar|^2 ||Phi_m||^2_H = ||Phi_m||^2_F.
    """
    m = as_partition(alg, m)
    pl = pochhammer(lam, m, alg.d)
    if pl == 0:
        raise errors.RankMismatch(f"m={m} is not admissible at lambda={lam}")
    return mpq(-2) ** m.weight * pl


def bounded_domain_unitarity(alg: Algebra, lam, m) -> tuple:
    """(|scalar|^2 ||Phi_m||^2_H, ||Phi_m||^2_F), equal exactly."""
    s = bounded_domain_scalar(alg, lam, m)
    return s * s * hardy_norm_sq(alg, lam, m), fock_norm_sq(alg, lam, m)


# ---------------------------------------------------- inversion operator

def inversion_apply(alg: Algebra, lam, v: KFiniteVector) -> KFiniteVector:
    """U_lambda on a spherical expansion: ell_m -> (-1)^|m| ell_m."""
    if not v.is_spherical:
        raise errors.NotSphericalExpansion("U_lambda closed form acts on spherical expansions")
    out = {}
    for m, c in v.spherical.items():
        m = as_partition(alg, m)
        out[m] = c * (-1) ** m.weight
    return KFiniteVector(v.side, out)


def fock_inversion(alg: Algebra, lam, F: Poly) -> Poly:
    """(-1)^*: F(z) -> F(-z), the Fock-side form of U_lambda."""
    minus = np.empty((alg.n, alg.n), dtype=object)
    for i in range(alg.n):
        for j in range(alg.n):
            minus[i, j] = mpq(-1) if i == j else mpq(0)
    return F.linear_substitute(minus)


def inversion_numeric(alg: Algebra, lam, psi, x, cfg: BesselSeriesConfig = DEFAULT_CONFIG,
                      measure: OrbitMeasure | None = None, zonal: bool = False) -> float:
    """T_lambda psi(x) = 2^{-r lam} int J_lambda(x, y) psi(y) d mu_lambda(y).

    ``zonal`` as for :func:`bargmann_numeric`, with x in the span of the frame.
    """
    return float(np.real(2.0 ** (-alg.r * float(lam)) * j_pairing(alg, lam, psi, x, cfg, measure, zonal)))


def j_pairing(alg: Algebra, lam, psi, x, cfg: BesselSeriesConfig = DEFAULT_CONFIG,
              measure: OrbitMeasure | None = None, zonal: bool = False) -> float:
    """int J_lambda(x, y) psi(y) d mu_lambda(y) for x in the closed cone."""
    if alg.r > 2:
        raise errors.RankMismatch("kernel quadrature needs rank <= 2")
    mu = measure if measure is not None else orbit_measure(alg, lam)
    x = _real_points(x)
    G = np.asarray(alg.gram_f, dtype=float)
    detx = float(alg.det_poly.eval_many(x[None, :].astype(complex))[0].real)
    Gx = G @ x

    def f(y):
        y = _real_points(y)
        dets = alg.det_poly.eval_many(y).real * detx
        return kernel_many(alg, lam, y @ Gx, dets, -1, cfg, wrank=mu.k).real * np.asarray(psi(y))

    return mu.integrate(f, zonal=zonal)


# ---------------------------------------------------- Whittaker vectors

def whittaker_phi(alg: Algebra, lam, z: FactoredPoint, x, cfg: BesselSeriesConfig = DEFAULT_CONFIG) -> complex:
    """The density of phi_{lambda,z} = J_lambda(z, x) d mu_lambda(x) at x."""
    return bessel_J(alg, lam, np.asarray(x, dtype=complex), z, cfg).value


def whittaker_pairing(alg: Algebra, lam, z, psi, cfg: BesselSeriesConfig = DEFAULT_CONFIG,
                      measure: OrbitMeasure | None = None, zonal: bool = False) -> float:
    """<phi_{lambda,z}, psi> = int J_lambda(z, x) psi(x) d mu_lambda(x); equals 2^{r lam} (U psi)(z)."""
    return float(np.real(j_pairing(alg, lam, psi, z, cfg, measure, zonal)))


def whittaker_eigen_residual(alg: Algebra, lam, b_exact, v, N: int) -> Poly:
    """(v|B_lambda) J_N + (v|z) J_N for the degree-N truncation J_N of x -> J_lambda(z, x), z = b^2.

    Everything below degree N cancels; the returned residual is (v|z) times
    the top shell.
    """
    from .bessel import bessel_truncated_poly
    from .diffops import bessel_pair

    T = bessel_truncated_poly(alg, lam, b_exact, N, sign=-1)
    z = alg.mul(b_exact, b_exact)
    vz = alg.inner(v, z)
    return bessel_pair(alg, v, lam).apply(T) + T.scale(vz)


def delta_pairing(alg: Algebra, p: Poly, x) -> float:
    """<delta_x, p e^{-tr}> = p(x) e^{-tr x}."""
    x = _real_points(x)
    return float(p.eval_many(x[None, :])[0].real * math.exp(-float(alg.trace(x))))


# ------------------------------------------------------------ JSON records

@dataclass
class IdentityRecord:
    identity: str
    algebra: str
    lam: object
    m: object
    lhs: object
    rhs: object
    mode: str
    note: str = ""

    @property
    def abs_err(self) -> float:
        return abs(to_complex(self.lhs) - to_complex(self.rhs))

    @property
    def rel_err(self) -> float:
        den = abs(to_complex(self.rhs))
        return self.abs_err / den if den else self.abs_err

    def to_json(self) -> dict:
        def enc(x):
            if isinstance(x, (mpq, QI)) or type(x).__name__ == "mpz":
                return str(x)
            if isinstance(x, complex):
                return [x.real, x.imag] if x.imag else x.real
            return x

        out = {
            "identity": self.identity,
            "algebra": self.algebra,
            "lambda": str(self.lam),
            "m": None if self.m is None else list(self.m),
            "lhs": enc(self.lhs),
            "rhs": enc(self.rhs),
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
            "mode": self.mode,
        }
        if self.note:
            out["note"] = self.note
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def fischer_records(alg: Algebra, lam, N: int) -> list[IdentityRecord]:
    """[Phi_m, Phi_m] against the closed form for admissible |m| <= N."""
    wp = WallachPoint.of(alg, lam)
    out = []
    for m in partitions_upto(N, alg.r, wp.k):
        lhs, rhs = fischer_fock_norm(alg, lam, m)
        out.append(IdentityRecord("bessel_fischer_norm", alg.name, lam, m.parts, lhs, rhs, "exact"))
    return out
