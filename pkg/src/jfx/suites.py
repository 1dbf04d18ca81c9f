"""Verification suites: each runner returns JSON-ready records with an ``ok`` flag.

Records carry no timings or host data, so equal inputs and seeds give
byte-identical reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from gmpy2 import mpq

from . import bessel as B
from . import branching as BR
from . import quadrature as Q
from . import transforms as T
from .diffops import (OrbitIdeal, bessel_pair, cayley, co_basis, co_bracket, dpiC, drho,
                      tangentiality_check)
from .exact import QI
from .jordan import Algebra, get_algebra
from .polyengine import check_wallach, engine, partitions, partitions_upto, pochhammer, wallach_points

SUITES = ("jordan-axioms", "fischer-fock", "bargmann", "inversion", "bessel-ode", "measures",
          "branching", "cayley-brackets", "tangentiality")

DEFAULT_TOL = {"bargmann": 1e-5, "roundtrip": 1e-4, "inversion": 1e-4, "normalization": 1e-8,
               "laplace": 1e-6, "laguerre-norm": 1e-6, "k-moment": 1e-4}


@dataclass
class SuiteSpec:
    suite: str
    algebra: str | None = None
    lambdas: list | None = None
    max_weight: int | None = None
    tol: float | None = None
    seed: int = 0
    n: int | None = None
    m: int | None = None
    cap: int = 4
    partition: tuple | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}; expected one of {', '.join(SUITES)}")


# ---------------------------------------------------------------- helpers

def _enc(x):
    if isinstance(x, (mpq, QI)) or type(x).__name__ == "mpz":
        return str(x)
    if isinstance(x, complex):
        return [x.real, x.imag] if x.imag else x.real
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def record(suite, identity, ok, algebra=None, lam=None, m=None, lhs=None, rhs=None, err=None,
           tol=None, mode="exact", **extra) -> dict:
    out = {"suite": suite, "identity": identity, "algebra": algebra,
           "lambda": None if lam is None else str(lam),
           "m": None if m is None else list(m), "mode": mode, "ok": bool(ok)}
    if lhs is not None:
        out["lhs"] = _enc(lhs)
    if rhs is not None:
        out["rhs"] = _enc(rhs)
    if err is not None:
        out["err"] = float(err)
    if tol is not None:
        out["tol"] = float(tol)
    out.update({k: _enc(v) for k, v in extra.items()})
    return out


def default_lambdas(alg: Algebra) -> list:
    """Nonzero discrete Wallach points and two continuous samples."""
    base = mpq((alg.r - 1) * alg.d, 2)
    return [l for l in wallach_points(alg) if l != 0] + [base + mpq(7, 10), base + mpq(13, 4)]


def _lams(spec: SuiteSpec, alg: Algebra) -> list:
    return list(spec.lambdas) if spec.lambdas else default_lambdas(alg)


def orbit_rank(alg: Algebra, lam) -> int:
    k = check_wallach(alg, lam)
    return alg.r if k is None else k


def frame_points(alg: Algebra, k: int, count: int, seed: int, complex_points: bool) -> list:
    """Random points in the span of the first k frame idempotents (rank <= k)."""
    rng = np.random.default_rng(seed)
    fr = [np.asarray(c, dtype=float) for c in alg.frame[:k]]
    out = []
    for _ in range(count):
        if complex_points:
            coef = rng.normal(size=k) + 1j * rng.normal(size=k)
        else:
            coef = rng.uniform(0.1, 2.0, size=k)
        out.append(sum(c * f for c, f in zip(coef, fr)))
    return out


def _mod_ideal(alg: Algebra, k: int, p):
    return OrbitIdeal(alg, k).reduce(p) if k < alg.r else p


# ----------------------------------------------------------------- suites

def run_jordan_axioms(spec: SuiteSpec) -> list:
    alg = get_algebra(spec.algebra)
    rng = np.random.default_rng(spec.seed)
    out = []

    def rnd():
        return alg.element([mpq(int(v), int(d)) for v, d in zip(rng.integers(-5, 6, alg.n),
                                                                 rng.integers(1, 4, alg.n))])

    for trial in range(5):
        x, y, z = rnd(), rnd(), rnd()
        x2 = alg.square(x)
        lhs = alg.mul(alg.mul(x, y), x2)
        rhs = alg.mul(x, alg.mul(y, x2))
        out.append(record("jordan-axioms", "jordan_identity", all(lhs == rhs), alg.name, trial=trial))
        comm = alg.mul(x, y) == alg.mul(y, x)
        out.append(record("jordan-axioms", "commutativity", all(comm), alg.name, trial=trial))
        assoc = alg.inner(alg.mul(x, y), z) == alg.inner(x, alg.mul(y, z))
        out.append(record("jordan-axioms", "trace_form_associative", assoc, alg.name, trial=trial))
    x = rnd()
    out.append(record("jordan-axioms", "unit", all(alg.mul(alg.unit, x) == x), alg.name))
    fr = alg.frame
    frame_ok = sum(alg.trace(c) for c in fr) == alg.r and all(
        all(alg.mul(fr[i], fr[j]) == (fr[i] if i == j else alg.zero()))
        for i in range(alg.r) for j in range(alg.r))
    out.append(record("jordan-axioms", "jordan_frame", frame_ok, alg.name))
    out.append(record("jordan-axioms", "det_unit", alg.det(alg.unit) == 1, alg.name))
    return out


def run_fischer_fock(spec: SuiteSpec) -> list:
    alg = get_algebra(spec.algebra)
    N = 4 if spec.max_weight is None else spec.max_weight
    out = []
    for lam in _lams(spec, alg):
        for rec in T.fischer_records(alg, lam, N):
            out.append(record("fischer-fock", rec.identity, rec.lhs == rec.rhs, alg.name, lam, rec.m,
                              rec.lhs, rec.rhs))
    return out


def run_bargmann(spec: SuiteSpec) -> list:
    """Exact Laplace route for every rank; kernel quadrature and the rank-one round trip."""
    alg = get_algebra(spec.algebra)
    N = 2 if spec.max_weight is None else spec.max_weight
    tol = spec.tol or DEFAULT_TOL["bargmann"]
    eng = engine(alg)
    out = []
    for lam in _lams(spec, alg):
        k = orbit_rank(alg, lam)
        ms = partitions_upto(N, alg.r, k)
        for m in ms:
            lhs = T.bargmann_exact(alg, lam, T.laguerre_vector_poly(alg, lam, m))
            rhs = eng.spherical_phi(m).scale(mpq(-1, 2) ** m.weight)
            ok = _mod_ideal(alg, k, lhs - rhs).is_zero()
            out.append(record("bargmann", "bargmann_laguerre_exact", ok, alg.name, lam, m.parts))
        if alg.r > 2:
            continue
        mu = Q.orbit_measure(alg, lam)
        zs = frame_points(alg, k, 5, spec.seed, True)
        for m in partitions_upto(min(N, 2), alg.r, k):
            psi = T.laguerre_evaluator(alg, lam, m)
            phi = eng.spherical_phi(m)
            err = 0.0
            for z in zs:
                num = T.bargmann_numeric(alg, lam, psi, z, measure=mu, zonal=True)
                ex = (-0.5) ** m.weight * complex(phi.eval_many(z[None, :])[0])
                err = max(err, abs(num - ex) / abs(ex))
            out.append(record("bargmann", "bargmann_laguerre_numeric", err <= tol, alg.name, lam, m.parts,
                              err=err, tol=tol, mode="numeric"))
        if alg.r == 1:
            out.extend(_roundtrip_records(alg, lam, min(N, 2)))
    return out


def _roundtrip_records(alg: Algebra, lam, N: int) -> list:
    tol = DEFAULT_TOL["roundtrip"]
    cm = Q.ComplexOrbitMeasure(alg, lam)
    out = []
    for j in range(N + 1):
        psi = T.laguerre_evaluator(alg, lam, (j,))
        err = 0.0
        for x in (0.3, 1.1, 2.6):
            v = T.bargmann_inverse_numeric(alg, lam, lambda z, j=j: (-0.5) ** j * z[:, 0] ** j,
                                           np.array([x]), measure=cm)
            err = max(err, abs(v / psi(np.array([[x]]))[0] - 1))
        out.append(record("bargmann", "inverse_roundtrip", err <= tol, alg.name, lam, (j,), err=err,
                          tol=tol, mode="numeric"))
    return out


def run_inversion(spec: SuiteSpec) -> list:
    alg = get_algebra(spec.algebra)
    N = 2 if spec.max_weight is None else spec.max_weight
    tol = spec.tol or DEFAULT_TOL["inversion"]
    eng = engine(alg)
    out = []
    for lam in _lams(spec, alg):
        k = orbit_rank(alg, lam)
        ms = partitions_upto(N, alg.r, k)
        for m in ms:
            v = T.KFiniteVector(T.SCHRODINGER, {m: mpq(1)})
            once = T.inversion_apply(alg, lam, v)
            twice = T.inversion_apply(alg, lam, once)
            phi = eng.spherical_phi(m)
            fock_twice = T.fock_inversion(alg, lam, T.fock_inversion(alg, lam, phi))
            ok = twice.spherical == v.spherical and fock_twice == phi
            ok = ok and once.spherical[m] == (-1) ** m.weight
            out.append(record("inversion", "inversion_square_identity", ok, alg.name, lam, m.parts))
        if alg.r > 2:
            continue
        mu = Q.orbit_measure(alg, lam)
        xs = frame_points(alg, k, 5, spec.seed, False)
        for m in partitions_upto(min(N, 2), alg.r, k):
            psi = T.laguerre_evaluator(alg, lam, m)
            err = 0.0
            for x in xs:
                num = T.inversion_numeric(alg, lam, psi, x, measure=mu, zonal=True)
                ex = (-1) ** m.weight * psi(x[None, :])[0]
                err = max(err, abs(num - ex) / abs(ex))
            out.append(record("inversion", "inversion_laguerre_numeric", err <= tol, alg.name, lam, m.parts,
                              err=err, tol=tol, mode="numeric"))
    return out


def run_bessel_ode(spec: SuiteSpec) -> list:
    """(v|B_lambda) I_N(., w) - sign (v|w) I_N(., w) lives in the top shell only."""
    alg = get_algebra(spec.algebra)
    N = 5 if spec.max_weight is None else spec.max_weight
    out = []
    eig = [mpq(1), mpq(1, 2), mpq(1, 3), mpq(2), mpq(3, 2)]
    for lam in _lams(spec, alg):
        k = orbit_rank(alg, lam)
        b = alg.from_eigen([eig[i] if i < k else mpq(0) for i in range(alg.r)])
        w = alg.mul(b, b)
        for sign, name in ((1, "I"), (-1, "J")):
            P = B.bessel_truncated_poly(alg, lam, b, N, sign)
            bad = 0
            for a in range(alg.n):
                v = alg._basis(a)
                res = bessel_pair(alg, v, lam).apply(P) - P.scale(sign * alg.inner(v, w))
                res = _mod_ideal(alg, k, res)
                if any(sum(e) != N for e in res.terms):
                    bad += 1
            out.append(record("bessel-ode", f"bessel_ode_{name}", bad == 0, alg.name, lam, None,
                              degree=N, failures=bad))
    return out


def run_measures(spec: SuiteSpec) -> list:
    alg = get_algebra(spec.algebra)
    if alg.r > 2:
        raise ValueError("the measure suite covers rank <= 2")
    eng = engine(alg)
    trv = np.array([float(v) for v in alg.tr_vec])
    y = alg.from_eigen([1.3, 0.8][: alg.r]).astype(float)
    yinv = alg.inverse(y)
    out = []
    for lam in _lams(spec, alg):
        k = orbit_rank(alg, lam)
        lamf = float(lam)
        mu = Q.orbit_measure(alg, lam)
        # normalization: analytic constant where known, else a finer rule
        tol = DEFAULT_TOL["normalization"]
        ana = mu.analytic_constant()
        if ana is not None:
            err = abs(mu.constant / ana - 1)
        else:
            fine = Q.OrbitMeasure(alg, lam, step=mu.rule.step / 2)
            err = abs(mu.constant * fine.integrate_radial_raw(lambda b: np.exp(-2 * b.sum(axis=1))) - 1)
        out.append(record("measures", "normalization", err <= tol, alg.name, lam, err=err, tol=tol,
                          mode="numeric"))
        for m in partitions_upto(2, alg.r, k):
            phi = eng.spherical_phi(m)
            f = lambda x, phi=phi: np.exp(-(x @ alg.gram_f @ y)) * phi.eval_many(x).real
            lhs = mu.integrate(f, zonal=True)
            rhs = (2 ** (alg.r * lamf) * float(pochhammer(lam, m, alg.d)) * float(alg.det(y)) ** (-lamf)
                   * phi.eval_many(yinv[None, :])[0].real)
            tol = DEFAULT_TOL["laplace"]
            err = abs(lhs / rhs - 1)
            out.append(record("measures", "laplace_phi", err <= tol, alg.name, lam, m.parts, lhs, rhs, err,
                              tol, "numeric"))
            L = eng.laguerre_poly(m, lam)
            g = lambda x, L=L: np.exp(-2 * (x @ trv)) * L.eval_many(2 * x).real ** 2
            nrm = mu.integrate(g, invariant=True)
            ex = float(T.schrodinger_norm_sq(alg, lam, m))
            tol = DEFAULT_TOL["laguerre-norm"]
            err = abs(nrm / ex - 1)
            out.append(record("measures", "laguerre_norm", err <= tol, alg.name, lam, m.parts, nrm, ex, err,
                              tol, "numeric"))
        out.extend(_k_moment_records(alg, lam, k))
    return out


def _k_moment_records(alg: Algebra, lam, k: int) -> list:
    """int Phi_m K_lambda d mu = 2^{r lam} Gamma_Omega(n/r) (n/r)_m (lambda)_m."""
    tol = DEFAULT_TOL["k-moment"]
    together, alone = Q.density_rates(alg, lam)
    mu = Q.OrbitMeasure(alg, lam, step=0.3, t_lo=-16 / min(together, alone, 1.0), t_hi=6.5)
    mu.calibrate()
    b = mu.rule.eigen
    Kv = B.k_on_orbit(alg, lam, b, step=0.3, check_tol=None)
    out = []
    for m in partitions_upto(2, alg.r, k):
        if alg.r == 2:
            parts = (list(m.parts) + [0])[:2]

            def F(bb, parts=parts):
                second = bb[:, 1] if bb.shape[1] > 1 else 0 * bb[:, 0]
                return B.phi_rank2_radial(alg.d, parts, bb[:, 0], second).real * Kv
        else:
            def F(bb, w=m.weight):
                return bb[:, 0] ** w * Kv
        val = mu.integrate_radial(F)
        ex = (2 ** (alg.r * float(lam)) * Q.gamma_omega(alg, alg.n / alg.r)
              * float(pochhammer(mpq(alg.n, alg.r), m, alg.d) * pochhammer(lam, m, alg.d)))
        err = abs(val / ex - 1) if math.isfinite(val) else float("inf")
        out.append(record("measures", "k_moment", err <= tol, alg.name, lam, m.parts, val, ex, err, tol,
                          "numeric"))
    return out


def run_branching(spec: SuiteSpec) -> list:
    n = spec.n if spec.n is not None else 4
    cap = spec.cap
    splits = [spec.m] if spec.m is not None else list(range(1, n))
    model = BR.NullConeModel(n)
    out = []
    for m in splits:
        if not 1 <= m < n:
            raise ValueError("need 1 <= m < n")
        for d in BR.decompose(model, m, cap):
            out.append(record("branching", "graded_dimension", d.ok, f"so(2,{n})", model.lam, None,
                              split=m, **{k: v for k, v in d.to_json().items() if k != "ok"}))
        for k in range(min(3, cap) + 1):
            for X in BR.subalgebra_elements(m):
                res = BR.branching_operator_check(n, m, k, X, cap)
                out.append(record("branching", "restriction_identity", res.ok, f"so(2,{n})", model.lam, None,
                                  split=m, k=k, element=X.kind, a=[str(v) for v in X.a],
                                  checked=res.checked, nonzero=res.nonzero))
    return out


def run_cayley_brackets(spec: SuiteSpec) -> list:
    alg = get_algebra(spec.algebra)
    basis = co_basis(alg)
    bad = sum(1 for X in basis for Y in basis
              if not cayley(alg, co_bracket(alg, X, Y)).equals(co_bracket(alg, cayley(alg, X), cayley(alg, Y))))
    out = [record("cayley-brackets", "cayley_homomorphism", bad == 0, alg.name, failures=bad,
                  pairs=len(basis) ** 2)]
    lams = spec.lambdas or [l for l in wallach_points(alg) if l != 0] + [mpq((alg.r - 1) * alg.d, 2) + mpq(7, 10)]
    for lam in lams:
        for name, f in (("dpi", dpiC), ("drho", drho)):
            ops = [f(alg, lam, X) for X in basis]
            bad = pairs = 0
            for i in range(len(basis)):
                for j in range(i + 1, len(basis)):
                    pairs += 1
                    d = ops[i].commutator(ops[j]) - f(alg, lam, co_bracket(alg, basis[i], basis[j]))
                    if not d.is_zero():
                        bad += 1
            out.append(record("cayley-brackets", f"{name}_homomorphism", bad == 0, alg.name, lam,
                              failures=bad, pairs=pairs))
    return out


def run_tangentiality(spec: SuiteSpec) -> list:
    alg = get_algebra(spec.algebra)
    cap = 4 if spec.max_weight is None else spec.max_weight
    eng = engine(alg)
    out = []
    for k in range(alg.r):
        rep = tangentiality_check(alg, k, cap)
        out.append(record("tangentiality", "bessel_tangential", rep.ok, alg.name, rep.lam, None,
                          k=k, checked=rep.checked, failures=len(rep.failures)))
        ideal = OrbitIdeal(alg, k)
        ok = all(ideal.contains(eng.delta_m(m)) == (not m.vanishes_beyond(k))
                 for N in range(1, cap + 1) for m in partitions(N, alg.r))
        out.append(record("tangentiality", "ideal_membership_delta_m", ok, alg.name, None, None, k=k))
    return out


RUNNERS = {
    "jordan-axioms": run_jordan_axioms,
    "fischer-fock": run_fischer_fock,
    "bargmann": run_bargmann,
    "inversion": run_inversion,
    "bessel-ode": run_bessel_ode,
    "measures": run_measures,
    "branching": run_branching,
    "cayley-brackets": run_cayley_brackets,
    "tangentiality": run_tangentiality,
}

NEEDS_ALGEBRA = set(SUITES) - {"branching"}


def run(spec: SuiteSpec) -> list:
    if spec.suite in NEEDS_ALGEBRA and not spec.algebra:
        raise ValueError(f"suite {spec.suite} needs --algebra")
    if spec.algebra:
        alg = get_algebra(spec.algebra)
        for lam in spec.lambdas or []:
            check_wallach(alg, lam)
    return RUNNERS[spec.suite](spec)
