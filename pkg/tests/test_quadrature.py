import math

import numpy as np
import pytest
from gmpy2 import mpq
from scipy import integrate, special, stats

from jfx import errors
from jfx import quadrature as Q
from jfx.jordan import get_algebra, shipped_algebras
from jfx.polyengine import engine, partitions_upto, pochhammer
from jfx.suites import default_lambdas


def test_gamma_omega_closed_forms():
    real = get_algebra("real")
    for lam in (0.7, 2.0, 5.5):
        assert math.isclose(Q.gamma_omega(real, lam), special.gamma(lam), rel_tol=1e-14)
    sym2 = get_algebra("sym:2")
    for lam in (0.7, 2.0, 3.25):
        expect = math.sqrt(2 * math.pi) * special.gamma(lam) * special.gamma(lam - 0.5)
        assert math.isclose(Q.gamma_omega(sym2, lam), expect, rel_tol=1e-14)
    with pytest.raises(errors.PoleAtLambda):
        Q.gamma_omega(sym2, 0.5)


def test_gamma_omega_direct_integral_spin3():
    # orthonormal coordinates y = sqrt(2) x; polar in the spatial part
    lam = 2.0
    inner = lambda rho, s: math.exp(-2 * s) * (s * s - rho * rho) ** (lam - 1.5) * 2 * math.pi * rho
    val, _ = integrate.dblquad(inner, 0, 60, 0, lambda s: s, epsabs=1e-13, epsrel=1e-11)
    direct = 2 ** 1.5 * val
    assert math.isclose(direct, Q.gamma_omega(get_algebra("spin:3"), lam), rel_tol=1e-6)


@pytest.mark.parametrize("name", shipped_algebras())
def test_normalization_all_pairs(name):
    alg = get_algebra(name)
    for lam in default_lambdas(alg):
        mu = Q.orbit_measure(alg, lam)
        val = mu.integrate_radial(lambda b: np.exp(-2 * b.sum(axis=1)))
        assert abs(val - 1) <= 1e-8
        ana = mu.analytic_constant()
        if ana is not None:
            # rank <= 2 rules are sharp; the coarse rank 3-4 rules only reach ~1e-3
            tol = 1e-10 if alg.r <= 2 else 5e-3
            assert abs(mu.constant / ana - 1) <= tol


def test_calibration_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("JFX_CACHE_DIR", str(tmp_path))
    alg = get_algebra("spin:3")
    mu = Q.OrbitMeasure(alg, mpq(17, 10))
    c1 = mu.calibrate(use_cache=False)
    c2 = Q.OrbitMeasure(alg, mpq(17, 10)).calibrate()
    assert c1 == c2


def test_uncalibrated_rule_raises():
    mu = Q.OrbitMeasure(get_algebra("real"), 2)
    with pytest.raises(errors.RuleNotCalibrated):
        mu.integrate_radial(lambda b: b[:, 0])


@pytest.mark.parametrize("name", ["real", "spin:3", "herm:2"])
def test_laplace_identity(name):
    alg = get_algebra(name)
    eng = engine(alg)
    y = alg.from_eigen([1.3, 0.8][: alg.r]).astype(float)
    yinv = alg.inverse(y)
    for lam in default_lambdas(alg)[:2]:
        k = alg.r if lam > (alg.r - 1) * alg.d / 2 else int(2 * lam / alg.d)
        mu = Q.orbit_measure(alg, lam)
        for m in partitions_upto(2, alg.r, k):
            phi = eng.spherical_phi(m)
            f = lambda x: np.exp(-(x @ alg.gram_f @ y)) * phi.eval_many(x).real
            lhs = mu.integrate(f, zonal=True)
            rhs = (2 ** (alg.r * float(lam)) * float(pochhammer(lam, m, alg.d))
                   * float(alg.det(y)) ** (-float(lam)) * phi.eval_many(yinv[None, :])[0].real)
            assert abs(lhs / rhs - 1) <= 1e-6


def _cone_rule_sym2(alpha, npts=48, jac=None):
    """Nodes on Sym(2, R)^+ as (p, s, q) with q = t sqrt(p s).

    Weights carry (p s)^alpha e^{-(p + s)} and the Jacobi weight jac(t) if given;
    the integrand must supply whatever else remains.
    """
    xl, wl = special.roots_genlaguerre(npts, alpha)
    if jac is None:
        t, wt = special.roots_legendre(npts)
    else:
        t, wt = special.roots_jacobi(npts, jac, jac)
    P, S, T = np.meshgrid(xl, xl, t, indexing="ij")
    W = np.einsum("i,j,k->ijk", wl, wl, wt)
    return P.ravel(), S.ravel(), (T * np.sqrt(P * S)).ravel(), W.ravel()


def _batch_mul(alg, x, y):
    return np.einsum("pa,pb,abc->pc", x, y, alg.C_f)


def test_restriction_matches_cone_cubature_sym2():
    alg = get_algebra("sym:2")
    lam = 1.7
    mu = Q.orbit_measure(alg, lam)
    const = 2 ** (2 * lam) / Q.gamma_omega(alg, lam)
    tests = [
        lambda p, s, q: 1.0 + 0 * p,
        lambda p, s, q: p,
        lambda p, s, q: q * q,
        lambda p, s, q: p * s + q,
        lambda p, s, q: np.cos(p - s),
    ]
    # e^{-2 tr} det^{lam-3/2} dq with p, s scaled by 1/2: (p s)^{lam-1} (1-t^2)^{lam-3/2}
    p, s, q, w = _cone_rule_sym2(lam - 1, jac=lam - 1.5)
    scale = 2.0 ** (-(2 * lam))
    for g in tests:
        # Lebesgue measure of the trace form: dx = sqrt(2) dp ds dq
        direct = const * math.sqrt(2) * scale * np.dot(w, g(p / 2, s / 2, q / 2))
        ours = mu.integrate(lambda x: g(x[:, 0], x[:, 1], x[:, 2]) * np.exp(-2 * (x[:, 0] + x[:, 1])))
        assert abs(ours - direct) <= 1e-6 * max(1.0, abs(direct))


def test_peirce_integral_formula_sym2():
    alg = get_algebra("sym:2")
    c = np.asarray(alg.frame[0], dtype=float)

    def f(x):
        return np.exp(-(x[:, 0] + x[:, 1]) - 0.3 * (x[:, 0] - 1) ** 2 - 0.5 * x[:, 2] ** 2)

    p, s, q, w = _cone_rule_sym2(0.5)
    lhs = math.sqrt(2) * np.dot(w, f(np.stack([p, s, q], axis=1)) * np.exp(p + s))

    # x_half = h S12 with h = 2 v / sqrt(x0) keeps the h-integral Gaussian
    npts = 48
    xl, wl = special.roots_genlaguerre(npts, 0.0)
    z0, w0 = special.roots_genlaguerre(npts, 0.5)
    v, wv = special.roots_hermite(npts)
    X1, Z, V = np.meshgrid(xl, z0, v, indexing="ij")
    W = np.einsum("i,j,k->ijk", wl, w0, wv).ravel()
    X1, Z, V = X1.ravel(), Z.ravel(), V.ravel()
    H = 2 * V / np.sqrt(Z)
    zero = np.zeros_like(X1)
    a = np.stack([X1, zero, zero], axis=1)
    h = np.stack([zero, zero, H], axis=1)
    z = np.stack([zero, Z, zero], axis=1)
    hz = _batch_mul(alg, h, z)
    cc = np.broadcast_to(c, a.shape)
    phi = a + 0.5 * _batch_mul(alg, cc, _batch_mul(alg, h, hz)) + hz + z
    # remove the rule weights e^{-x1} x0^{1/2} e^{-x0} e^{-v^2}; dh = 2 dv / sqrt(x0)
    vals = f(phi) * np.exp(X1 + Z + V * V) * 2
    # V(c, 1/2) = R S12 carries trace-form length sqrt(2); k (r-k) d = 1
    rhs = math.sqrt(2) / 2 * np.dot(W, vals)
    assert abs(lhs / rhs - 1) <= 1e-8


def test_haar_real_is_identity():
    ks = Q.haar_KL(get_algebra("real"), 5, 0)
    assert np.allclose(ks, 1.0)


@pytest.mark.parametrize("name", ["spin:3", "spin:4", "sym:3", "herm:2"])
def test_haar_samples_are_automorphisms(name):
    alg = get_algebra(name)
    ks = Q.haar_KL(alg, 20, 1)
    rng = np.random.default_rng(2)
    x, y = rng.normal(size=alg.n), rng.normal(size=alg.n)
    e = np.asarray(alg.unit, dtype=float)
    for k in ks:
        assert np.allclose(k @ e, e)
        assert np.allclose(alg.mul(k @ x, k @ y), k @ alg.mul(x, y))
    us = Q.haar_U(alg, 20, 3)
    z = rng.normal(size=alg.n) + 1j * rng.normal(size=alg.n)
    for u in us:
        assert np.isclose(alg.norm(u @ z), alg.norm(z))


def test_haar_spin3_symmetry():
    alg = get_algebra("spin:3")
    ks = Q.haar_KL(alg, 20000, 4)
    x = np.array([1.0, 0.6, 0.0])
    vals = np.einsum("sij,j->si", ks, x)[:, 1]
    assert abs(vals.mean()) <= 3 * vals.std() / math.sqrt(len(vals))


def test_haar_spin4_uniform_directions():
    alg = get_algebra("spin:4")
    ks = Q.haar_KL(alg, 30000, 5)
    v = np.einsum("sij,j->si", ks, np.array([0.0, 1.0, 0.0, 0.0]))[:, 1:]
    # the z-coordinate of a uniform point on S^2 is uniform on [-1, 1]
    counts, _ = np.histogram(v[:, 2], bins=10, range=(-1, 1))
    assert stats.chisquare(counts).pvalue > 0.01


def test_integrate_nu_smoke_deterministic():
    alg = get_algebra("spin:3")
    f = lambda z: np.exp(-np.abs(np.einsum("pi,ij,pj->p", z, alg.gram_f, z.conj())))
    a = Q.integrate_nu(alg, mpq(17, 10), f, 4000, 11)
    b = Q.integrate_nu(alg, mpq(17, 10), f, 4000, 11)
    assert a == b
    assert a.value > 0 and np.isfinite(a.value)


def test_fock_norm_rank_one():
    alg = get_algebra("real")
    lam = mpq(13, 4)
    from jfx import bessel as B

    cm = Q.ComplexOrbitMeasure(alg, lam)
    nodes = cm.radial_nodes(lambda a: B.omega_radial(alg, lam, a))
    for k in range(3):
        res = cm.integrate(lambda z: np.abs(z[:, 0]) ** (2 * k), 20000, 7, nodes=nodes)
        expect = 4 ** k * float(pochhammer(lam, (k,), 0)) * math.factorial(k)
        est, se = res.value / cm.c_lambda, res.stderr / cm.c_lambda
        assert abs(est - expect) <= max(3 * se, 1e-6 * expect)
