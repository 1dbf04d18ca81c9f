"""J-, I- and K-Bessel functions on symmetric cones and the Fock density omega.

J and I are summed shell by shell. For rank <= 2 the shells use closed radial
forms of Phi_m on the eigenvalues of zeta = P(a^{1/2}) u^{-1} z; for rank-one
arguments the series collapses to the classical one. Higher ranks fall back to
exact spherical polynomials up to the engine's degree cap.

K is an integral over the cone, computed in eigenvalue coordinates with the
trapezoid rule after a logarithmic substitution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
from gmpy2 import mpq
from scipy import special

from . import errors
from ._accel import radial_series
from .jordan import Algebra
from .polyengine import as_partition, check_wallach, engine, partitions, pochhammer1


@dataclass(frozen=True)
class BesselSeriesConfig:
    max_weight: int = 120
    tol: float = 1e-13
    safety_factor: float = 10.0

    def __post_init__(self):
        if self.max_weight < 0 or self.tol <= 0 or self.safety_factor < 1:
            raise ValueError("invalid series configuration")


DEFAULT_CONFIG = BesselSeriesConfig()


@dataclass(frozen=True)
class BesselValue:
    value: complex
    tail_estimate: float
    shells_used: int

    def to_json(self) -> dict:
        v = complex(self.value)
        return {
            "value": [v.real, v.imag],
            "tail_estimate": float(self.tail_estimate),
            "shells_used": int(self.shells_used),
        }


@dataclass(frozen=True)
class FactoredPoint:
    """w = u a with u unitary on V_C and a in the closed cone."""

    u: np.ndarray | None
    a: np.ndarray

    @property
    def point(self) -> np.ndarray:
        a = np.asarray(self.a, dtype=complex)
        return a if self.u is None else np.asarray(self.u, dtype=complex) @ a


def factored(alg: Algebra, a, u=None, tol: float = 1e-12) -> FactoredPoint:
    """Validate and build a FactoredPoint (u given as a coordinate matrix)."""
    a = np.asarray(a, dtype=float)
    ev = alg.spectral(a).eigenvalues
    if ev.size and ev[-1] < -tol * max(1.0, abs(ev[0])):
        raise errors.NotInClosedCone("a is not in the closed cone")
    if u is not None:
        u = np.asarray(u, dtype=complex)
        g = alg.gram_f
        if np.max(np.abs(u.conj().T @ g @ u - g)) > tol * 10 * max(1.0, float(np.max(np.abs(g)))):
            raise errors.NotStructureElement("u does not preserve the Hermitian trace form")
    return FactoredPoint(u, a)


def factor_real(alg: Algebra, x) -> FactoredPoint:
    return factored(alg, x)


# ------------------------------------------------------------ radial tables

def _beta_moment(d, i: int, j: int):
    """C(j, i) (d/2)_i (d/2)_{j-i} / (d)_j, exact."""
    h = mpq(d, 2)
    return comb(j, i) * pochhammer1(h, i) * pochhammer1(h, j - i) / pochhammer1(mpq(d), j)


@lru_cache(maxsize=None)
def _rank2_moments(d: int, N: int) -> tuple:
    """Rows j <= N of the rank-2 radial form Phi_(j,0)(a1, a2) = sum_i mom[j][i] a1^i a2^(j-i)."""
    return tuple(tuple(_beta_moment(d, i, j) for i in range(j + 1)) for j in range(N + 1))


@lru_cache(maxsize=None)
def rank2_expansion_coefficients(d: int, N: int) -> dict:
    """c_m = d_m / (n/r)_m for a rank-2 algebra of multiplicity d, all |m| <= N.

    Solved from exp(a1 + a2) = sum_m c_m Phi_m(a1, a2) degree by degree; the
    system is triangular in m2.
    """
    mom = _rank2_moments(d, N)
    out = {}
    for deg in range(N + 1):
        c = []
        for i in range(deg // 2 + 1):
            # coefficient of a1^(deg - i) a2^i
            rhs = mpq(comb(deg, i), math.factorial(deg))
            for m2 in range(i):
                j = deg - 2 * m2
                rhs -= c[m2] * mom[j][j + m2 - i]
            j = deg - 2 * i
            c.append(rhs / mom[j][j])
        for m2, v in enumerate(c):
            out[(deg - m2, m2)] = v
    return out


def phi_rank2_radial(d: int, m, a1, a2):
    """Phi_m at eigenvalues (a1, a2) on a rank-2 algebra (numeric, vectorized)."""
    m1, m2 = int(m[0]), int(m[1])
    j = m1 - m2
    mom = _rank2_moments(d, j)[j]
    a1 = np.asarray(a1, dtype=complex)
    a2 = np.asarray(a2, dtype=complex)
    acc = sum(float(mom[i]) * a1 ** i * a2 ** (j - i) for i in range(j + 1))
    return (a1 * a2) ** m2 * acc


def _alg_poch_float(lam: float, m, d: int) -> float:
    out = 1.0
    for i, mi in enumerate(m):
        base = lam - i * d / 2
        for t in range(mi):
            out *= base + t
    return out


# ----------------------------------------------------------- series driver

def _orbit_rank(alg: Algebra, lam) -> int:
    k = check_wallach(alg, lam)
    return alg.r if k is None else k


def _zeta(alg: Algebra, z, w: FactoredPoint) -> np.ndarray:
    zc = np.asarray(z, dtype=complex)
    if w.u is not None:
        zc = np.linalg.solve(np.asarray(w.u, dtype=complex), zc)
    root = alg.power(np.asarray(w.a, dtype=float), 0.5)
    return alg.pmat(root) @ zc


def _w_rank(alg: Algebra, w: FactoredPoint, tol: float = 1e-10) -> int:
    ev = alg.spectral(np.asarray(w.a, dtype=float)).eigenvalues
    scale = max(1.0, float(np.max(np.abs(ev)))) if ev.size else 1.0
    return int(np.sum(ev > tol * scale))


_TABLES: dict = {}


def _series_tables(alg: Algebra, lam, k: int, sign: int, nmax: int, mode: str):
    key = (alg.name, str(lam), k, sign, nmax, mode)
    hit = _TABLES.get(key)
    if hit is None:
        hit = _build_series_tables(alg, lam, k, sign, nmax, mode)
        if len(_TABLES) > 256:
            _TABLES.clear()
        _TABLES[key] = hit
    return hit


def _build_series_tables(alg: Algebra, lam, k: int, sign: int, nmax: int, mode: str):
    lamf = float(lam)
    coef = np.zeros((nmax + 1, nmax // 2 + 1))
    mom = np.zeros((nmax + 1, nmax + 1))
    if mode == "rank1":
        p = 1.0
        for N in range(nmax + 1):
            if N:
                p *= N * (lamf + N - 1)
            if p == 0.0:
                raise errors.PoleInCoefficient(f"(lambda)_{N} vanishes")
            coef[N, 0] = sign ** N / p
            mom[N, N] = 1.0
        return coef, mom
    d = alg.d
    cm = rank2_expansion_coefficients(d, nmax)
    for N in range(nmax + 1):
        for m2 in range(N // 2 + 1):
            m = (N - m2, m2)
            if m2 > 0 and k < 2:
                continue
            pl = _alg_poch_float(lamf, m, d)
            if pl == 0.0:
                raise errors.PoleInCoefficient(f"(lambda)_m vanishes at admissible m={m}")
            coef[N, m2] = sign ** N * float(cm[m]) / pl
    for j, row in enumerate(_rank2_moments(d, nmax)):
        for i, v in enumerate(row):
            mom[j, i] = float(v)
    return coef, mom


def _radial_args(alg: Algebra, zetas: np.ndarray, mode: str):
    if mode == "rank1":
        return zetas @ _trv(alg), np.zeros(zetas.shape[0], dtype=complex)
    t = zetas @ _trv(alg)
    dt = alg.det_poly.eval_many(zetas)
    disc = np.sqrt(t * t - 4 * dt)
    return (t + disc) / 2, (t - disc) / 2


def _trv(alg: Algebra) -> np.ndarray:
    return np.array([complex(float(v)) for v in alg.tr_vec])


def _series_mode(alg: Algebra, k: int, wrank: int) -> str:
    if alg.r == 1 or wrank <= 1 or k <= 1:
        return "rank1"
    if alg.r == 2:
        return "rank2"
    return "poly"


def bessel_series_many(alg: Algebra, lam, zetas, sign: int, cfg: BesselSeriesConfig = DEFAULT_CONFIG,
                       wrank: int | None = None):
    """sum_m sign^|m| d_m / ((n/r)_m (lambda)_m) Phi_m(zeta) for an array of zetas.

    Returns (values, tails, shells, converged mask).
    """
    zetas = np.atleast_2d(np.asarray(zetas, dtype=complex))
    k = _orbit_rank(alg, lam)
    mode = _series_mode(alg, k, alg.r if wrank is None else wrank)
    eff_tol = cfg.tol / cfg.safety_factor
    if mode == "poly":
        return _poly_series(alg, lam, k, zetas, sign, cfg)
    a1, a2 = _radial_args(alg, zetas, mode)
    big = float(max(np.max(np.abs(a1), initial=0.0), np.max(np.abs(a2), initial=0.0), 1.0))
    nmax = min(cfg.max_weight, max(2, int(300 / math.log10(big + 1.0))))
    coef, mom = _series_tables(alg, lam, k, sign, nmax, mode)
    vals, tails, shells = radial_series(a1, a2, coef, mom, eff_tol)
    conv = (shells <= nmax) & (tails <= eff_tol * np.maximum(np.abs(vals), 1e-300))
    conv &= shells < nmax + 1
    return vals, tails, shells, conv


def _poly_series(alg: Algebra, lam, k: int, zetas, sign: int, cfg: BesselSeriesConfig):
    eng = engine(alg)
    cap = min(cfg.max_weight, eng.degree_cap)
    eff_tol = cfg.tol / cfg.safety_factor
    npts = zetas.shape[0]
    total = np.zeros(npts, dtype=complex)
    last = np.zeros(npts)
    small = np.zeros(npts, dtype=int)
    shells = np.zeros(npts, dtype=int)
    done = np.zeros(npts, dtype=bool)
    n_over_r = mpq(alg.n, alg.r)
    for N in range(cap + 1):
        shell = np.zeros(npts, dtype=complex)
        for m in partitions(N, alg.r):
            if not m.vanishes_beyond(k):
                continue
            pl = _alg_poch_float(float(lam), m.parts, alg.d)
            if pl == 0.0:
                raise errors.PoleInCoefficient(f"(lambda)_m vanishes at admissible m={m}")
            c = float(mpq(eng.d_m(m)) / _exact_poch(n_over_r, m.parts, alg.d)) / pl * sign ** N
            shell += c * eng.spherical_phi(m).eval_many(zetas)
        active = ~done
        total[active] += shell[active]
        shells[active] = N + 1
        last[active] = np.abs(shell[active])
        ok = np.abs(shell) <= eff_tol * np.maximum(np.abs(total), 1e-300)
        small = np.where(ok, small + 1, 0)
        done |= small >= 2
        if done.all():
            break
    return total, last, shells, done


def _exact_poch(lam, m, d):
    out = mpq(1)
    for i, mi in enumerate(m):
        out *= pochhammer1(lam - mpq(i * d, 2), mi)
    return out


def _bessel(alg: Algebra, lam, z, w: FactoredPoint, sign: int, cfg: BesselSeriesConfig) -> BesselValue:
    k = _orbit_rank(alg, lam)
    wrank = _w_rank(alg, w)
    if wrank > k:
        raise errors.RankMismatch(f"w has rank {wrank} but lambda lies on the rank-{k} orbit")
    zeta = _zeta(alg, z, w)
    vals, tails, shells, conv = bessel_series_many(alg, lam, zeta[None, :], sign, cfg, wrank=wrank)
    if not conv[0]:
        raise errors.NotConverged(
            f"series tail {tails[0]:.3e} after {int(shells[0])} shells exceeds tol/safety"
        )
    return BesselValue(complex(vals[0]), float(tails[0]), int(shells[0]))


def bessel_J(alg: Algebra, lam, z, w: FactoredPoint, cfg: BesselSeriesConfig = DEFAULT_CONFIG) -> BesselValue:
    return _bessel(alg, lam, z, w, -1, cfg)


def bessel_I(alg: Algebra, lam, z, w: FactoredPoint, cfg: BesselSeriesConfig = DEFAULT_CONFIG) -> BesselValue:
    return _bessel(alg, lam, z, w, 1, cfg)


def kernel_many(alg: Algebra, lam, tr, det, sign: int, cfg: BesselSeriesConfig = DEFAULT_CONFIG,
                wrank: int | None = None) -> np.ndarray:
    """I_lambda (sign=+1) or J_lambda (sign=-1) at zetas given by tr zeta and det zeta.

    For zeta = P(w^{1/2}) z these are (z|w) and Delta(z) Delta(w), so no
    square roots are needed. Rank <= 2 only; ``det`` is ignored in rank one.
    """
    if alg.r > 2:
        raise errors.RankMismatch("invariant form needs rank <= 2")
    tr = np.atleast_1d(np.asarray(tr, dtype=complex))
    if alg.r == 1:
        zetas = tr[:, None] * np.asarray(alg.unit, dtype=float)[None, :]
    else:
        det = np.atleast_1d(np.asarray(det, dtype=complex))
        disc = np.sqrt(tr * tr - 4 * det)
        c1, c2 = (np.asarray(c, dtype=float) for c in alg.frame[:2])
        zetas = ((tr + disc) / 2)[:, None] * c1[None, :] + ((tr - disc) / 2)[:, None] * c2[None, :]
    vals, tails, shells, conv = bessel_series_many(alg, lam, zetas, sign, cfg, wrank=wrank)
    if not conv.all():
        bad = int(np.argmin(conv))
        raise errors.NotConverged(f"series tail {tails[bad]:.3e} after {int(shells[bad])} shells")
    return vals


def bessel_truncated_poly(alg: Algebra, lam, w_exact, N: int, sign: int = 1):
    """Degree <= N truncation of z -> I_lambda(z, w) (sign=+1) or J (sign=-1) as an exact Poly.

    ``w_exact`` is an exact cone point whose square root is exact, passed as
    that square root b (so w = b^2 and P(w^{1/2}) = P(b)).
    """
    eng = engine(alg)
    k = _orbit_rank(alg, lam)
    n_over_r = mpq(alg.n, alg.r)
    total = None
    for deg in range(N + 1):
        for m in partitions(deg, alg.r):
            if not m.vanishes_beyond(k):
                continue
            pl = _exact_poch(lam, m.parts, alg.d)
            if pl == 0:
                raise errors.PoleInCoefficient(f"(lambda)_m vanishes at admissible m={m}")
            c = mpq(eng.d_m(m)) / (_exact_poch(n_over_r, m.parts, alg.d) * pl) * sign ** deg
            term = eng.spherical_phi2_poly(m, w_exact).scale(c)
            total = term if total is None else total + term
    return total


# ---------------------------------------------------------------- K-Bessel

def _logsumexp_trapz(expo: np.ndarray, h: float) -> float:
    mx = float(np.max(expo))
    if not np.isfinite(mx):
        raise errors.QuadratureNotConverged("integrand is not finite")
    return math.exp(mx) * float(np.sum(np.exp(expo - mx))) * h


def _k_rank1_one(lam: float, x: float, step: float) -> float:
    if x < 0:
        raise errors.NotInClosedCone("K needs x >= 0")
    p = 1.0 - lam
    if x == 0.0 and p <= 0:
        raise errors.QuadratureNotConverged("K_lambda(0) diverges for lambda >= 1")
    hi = math.log(60.0 + 2 * abs(lam) + 2 * math.sqrt(x))
    lows = []
    if x > 0:
        lows.append(math.log(x / 60.0))
    if p > 0:
        lows.append(-45.0 / p)
    lo = max(lows) if len(lows) == 2 else lows[0]
    h = step / max(1.0, x ** 0.25)
    s = np.arange(lo, hi + h, h)
    expo = -np.exp(s) - x * np.exp(-s) + p * s
    return _logsumexp_trapz(expo, h)


def k_rank1(lam, x, step: float = 0.1) -> np.ndarray:
    """int_0^inf exp(-v - x/v) v^(-lambda) dv, vectorized over x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return np.array([_k_rank1_one(float(lam), float(v), step) for v in x])


def _bessel_i_scaled_ratio(nu: float, beta: np.ndarray) -> np.ndarray:
    """beta^(-nu) I_nu(beta) e^(-beta), continuous at beta = 0."""
    out = np.empty_like(beta)
    small = beta < 1e-6
    b = beta[small]
    out[small] = (1.0 + b * b / (4 * (nu + 1))) * np.exp(-b) / (2 ** nu * math.gamma(nu + 1))
    huge = beta > 1e7
    b = beta[huge]
    # scipy's ive returns nan far out; two asymptotic terms are exact to double here
    out[huge] = (1.0 - (4 * nu * nu - 1) / (8 * b)) / np.sqrt(2 * math.pi * b) * b ** (-nu)
    mid = ~small & ~huge
    out[mid] = special.ive(nu, beta[mid]) * beta[mid] ** (-nu)
    return out


def _k_rank2_one(lam: float, d: int, n: int, a1: float, a2: float, step: float) -> float:
    """Interior K on a rank-2 algebra at eigenvalues a1 >= a2 >= 0.

    Integrates exp(-tr v - (x | v^{-1})) Delta(v)^(-lambda) over the cone, with
    the sphere of v-directions done in closed form. The remaining coordinates
    are b2 = e^t and b1 = b2 e^g with g = log(1 + e^u).
    """
    if a2 < 0:
        raise errors.NotInClosedCone("K needs x in the closed cone")
    nu = (d - 1) / 2
    scale = max(1.0, a1 ** 0.25)
    hs = step / scale
    t_hi = math.log(60.0 + 2 * abs(lam) + 2 * math.sqrt(a1))
    # decay rate in t as b2 -> 0 when nothing else cuts the integrand off
    p = 2.0 - lam + d / 2 if a1 > 0 else 2.0 - 2.0 * lam + d
    if a2 > 0:
        t_lo = math.log(a2 / 60.0)
        if p > 0:
            t_lo = max(t_lo, -40.0 / p)
    elif p > 0:
        t_lo = -40.0 / p
    else:
        raise errors.QuadratureNotConverged("K_lambda diverges at this boundary point")
    t = np.arange(t_lo, t_hi + hs, hs)
    u = np.arange(-36.0 / (d + 1), t_hi - t_lo + 1.0 + hs, hs)
    T, U = np.meshgrid(t, u, indexing="ij")
    g = np.logaddexp(0.0, U)
    live = T + g <= t_hi + 1.0
    T, U, g = T[live], U[live], g[live]
    b2 = np.exp(T)
    b1 = b2 * np.exp(g)
    rho = 0.5 * b2 * np.expm1(g)
    beta = (a1 - a2) * rho / (b1 * b2)
    expo = (
        -b1 - b2 - a1 / b1 - a2 / b2
        + (1.0 - lam) * (2 * T + g)
        + d * np.log(rho)
        - np.logaddexp(0.0, -U)
    )
    ang = _bessel_i_scaled_ratio(nu, beta)
    mx = float(np.max(expo))
    if not np.isfinite(mx):
        raise errors.QuadratureNotConverged("K integrand is not finite")
    total = float(np.sum(np.exp(expo - mx) * ang)) * math.exp(mx) * hs * hs
    const = 2 ** (n / 2) * (2 * math.pi) ** ((d + 1) / 2) * 0.5
    return const * total


def k_rank2(lam, d: int, n: int, a1, a2, step: float = 0.2, check_tol: float | None = 1e-6) -> np.ndarray:
    """Interior rank-2 K at eigenvalue pairs; with ``check_tol`` each value is
    compared against a rule 1.5x coarser and QuadratureNotConverged is raised
    if they differ by more than that relative amount."""
    a1 = np.atleast_1d(np.asarray(a1, dtype=float))
    a2 = np.atleast_1d(np.asarray(a2, dtype=float))
    hi = np.maximum(a1, a2)
    lo = np.minimum(a1, a2)
    out = np.empty(hi.shape[0])
    for i, (x, y) in enumerate(zip(hi, lo)):
        v = _k_rank2_one(float(lam), d, n, float(x), float(y), step)
        if check_tol is not None:
            c = _k_rank2_one(float(lam), d, n, float(x), float(y), 1.5 * step)
            if abs(c - v) > check_tol * abs(v):
                raise errors.QuadratureNotConverged(
                    f"rank-2 K at ({x:.3g}, {y:.3g}): coarse/fine differ by {abs(c / v - 1):.2e}")
        out[i] = v
    return out


def boundary_constant(alg: Algebra, lam) -> float:
    """(2 pi)^{k(r-k)d/2} Gamma_{Omega_0}(n_0/r_0 + kd/2 - lambda) for lambda on the rank-k orbit."""
    from .quadrature import gamma_omega_rd

    k = _orbit_rank(alg, lam)
    r0 = alg.r - k
    n0 = r0 + r0 * (r0 - 1) * alg.d // 2
    arg = (n0 / r0 if r0 else 0.0) + k * alg.d / 2 - float(lam)
    g0 = gamma_omega_rd(r0, alg.d, arg) if r0 else 1.0
    return (2 * math.pi) ** (k * (alg.r - k) * alg.d / 2) * g0


def k_on_orbit(alg: Algebra, lam, eig, step: float | None = None, check_tol: float | None = 1e-6) -> np.ndarray:
    """K_lambda at points of O_lambda given by descending eigenvalues eig[P, k]."""
    k = _orbit_rank(alg, lam)
    eig = np.atleast_2d(np.asarray(eig, dtype=float))
    if eig.shape[1] < k:
        raise errors.RankMismatch("not enough eigenvalues for the orbit rank")
    lamf = float(lam)
    if k == 0:
        return np.full(eig.shape[0], boundary_constant(alg, lam))
    if k > 2:
        raise errors.QuadratureNotConverged("K-Bessel quadrature is implemented for orbit rank <= 2")
    if k == 1:
        base = k_rank1(lamf, eig[:, 0], **({} if step is None else {"step": step}))
    else:
        n_k = 2 + alg.d
        kw = {"check_tol": check_tol} if step is None else {"step": step, "check_tol": check_tol}
        base = k_rank2(lamf, alg.d, n_k, eig[:, 0], eig[:, 1], **kw)
    if k == alg.r:
        return base
    return boundary_constant(alg, lam) * base


def _eigen(alg: Algebra, x) -> np.ndarray:
    return alg.spectral(np.asarray(x, dtype=float)).eigenvalues


def bessel_K(alg: Algebra, lam, x) -> float:
    """K_lambda(x) for x in the open cone (continuous or top-rank lambda)."""
    ev = _eigen(alg, x)
    if ev[-1] <= 0:
        raise errors.NotInClosedCone("x must lie in the open cone")
    if alg.r > 2:
        raise errors.QuadratureNotConverged("interior K-Bessel quadrature is implemented for rank <= 2")
    lamf = float(lam)
    if alg.r == 1:
        return float(k_rank1(lamf, ev[:1])[0])
    return float(k_rank2(lamf, alg.d, alg.n, ev[:1], ev[1:2])[0])


def bessel_K_boundary(alg: Algebra, lam, x) -> float:
    """K_lambda on the rank-k orbit for lambda = kd/2, via the rank-k subalgebra."""
    k = check_wallach(alg, lam)
    if k is None or k >= alg.r:
        raise errors.NotInWallachSet("boundary K needs a discrete Wallach point kd/2 with k < r")
    ev = _eigen(alg, x)
    scale = max(1.0, float(np.max(np.abs(ev))))
    if np.sum(ev > 1e-10 * scale) != k or np.any(ev < -1e-10 * scale):
        raise errors.RankMismatch(f"x must lie on the rank-{k} orbit")
    return float(k_on_orbit(alg, lam, ev[None, :k])[0])


def omega(alg: Algebra, lam, z: FactoredPoint) -> float:
    """omega_lambda(u a) = K_lambda((a/2)^2)."""
    k = _orbit_rank(alg, lam)
    ev = _eigen(alg, z.a)
    scale = max(1.0, float(np.max(np.abs(ev))))
    if np.sum(ev > 1e-10 * scale) != k:
        raise errors.RankMismatch(f"z must lie on the rank-{k} orbit X_lambda")
    return float(k_on_orbit(alg, lam, (ev[None, :k] / 2) ** 2)[0])


def omega_radial(alg: Algebra, lam, a) -> np.ndarray:
    """omega_lambda at eigen-coordinates a[P, k] (vectorized)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    return k_on_orbit(alg, lam, (a / 2) ** 2)


# ---------------------------------------------------------- classical oracles

def _classical(fn, lam, x):
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    out = np.ones(x.shape, dtype=complex)
    nz = x != 0
    t = 2 * np.sqrt(x[nz])
    nu = float(lam) - 1
    out[nz] = math.gamma(float(lam)) * fn(nu, t) * (t / 2) ** (-nu)
    return out


def classical_J(lam, x):
    """Gamma(lambda) Jt_{lambda-1}(2 sqrt x), the rank-1 closed form."""
    return _classical(special.jv, lam, x)


def classical_I(lam, x):
    return _classical(special.iv, lam, x)


def classical_K(lam, x):
    """2 Kt_{lambda-1}(2 sqrt x)."""
    x = np.asarray(x, dtype=float)
    t = 2 * np.sqrt(x)
    nu = float(lam) - 1
    return 2 * special.kv(nu, t) * (t / 2) ** (-nu)
