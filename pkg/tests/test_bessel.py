import math

import numpy as np
import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from jfx import bessel as B
from jfx import errors
from jfx import quadrature as Q
from jfx.diffops import bessel_pair
from jfx.jordan import get_algebra
from jfx.suites import _mod_ideal, orbit_rank


def series_I(lam, x, terms=200):
    # sum x^N / (N! (lam)_N)
    tot, term = 0.0, 1.0 + 0j
    for N in range(terms):
        tot += term
        term *= x / ((N + 1) * (lam + N))
    return tot


def oracle(kind, lam, x):
    x = complex(x)
    t = 2 * np.sqrt(x)
    nu = lam - 1
    if x == 0:
        return 1.0
    fn = special.jv if kind == "J" else special.iv
    return math.gamma(lam) * fn(nu, t) * (t / 2) ** (-nu)


def test_frozen_cli_values():
    alg = get_algebra("real")
    one = np.array([1.0])
    v = B.bessel_I(alg, mpq(3, 2), one, B.factored(alg, one)).value
    assert abs(v - 1.8134302039235093) <= 1e-13
    assert abs(B.bessel_K(alg, 2, one) - 0.2797317636330446) <= 1e-9


def test_classical_helpers_match_power_series():
    for lam in (0.5, 1.0, 2.3, 4.75):
        for x in (0.01, 0.7, 3.0, 9.0):
            assert abs(B.classical_I(lam, x)[0] / series_I(lam, x) - 1) <= 1e-12
            assert abs(B.classical_J(lam, x)[0] / series_I(lam, -x) - 1) <= 1e-10


@pytest.mark.parametrize("lam", [0.5, 1.0, 1.5, 2.0, 3.7])
def test_rank_one_real_grid(lam):
    alg = get_algebra("real")
    for zw in np.linspace(-25, 25, 21):
        z = np.array([zw / 2.0])
        w = B.factored(alg, np.array([2.0]))
        j = B.bessel_J(alg, lam, z, w).value
        i = B.bessel_I(alg, lam, z, w).value
        assert abs(j - oracle("J", lam, zw)) <= 1e-10 * max(1.0, abs(oracle("J", lam, zw)))
        assert abs(i - oracle("I", lam, zw)) <= 1e-10 * abs(oracle("I", lam, zw))


def test_rank_one_complex_argument():
    alg = get_algebra("real")
    z = np.array([3.0 + 4.0j])
    w = B.factored(alg, np.array([1.5]))
    x = 1.5 * (3.0 + 4.0j)
    assert abs(B.bessel_J(alg, 1.3, z, w).value - oracle("J", 1.3, x)) <= 1e-10 * abs(oracle("J", 1.3, x))


@pytest.mark.parametrize("name", ["spin:3", "spin:5", "sym:3", "herm:2"])
def test_rank_one_orbit_reduces_to_classical(name):
    alg = get_algebra(name)
    lam = mpq(alg.d, 2)
    c1 = np.asarray(alg.frame[0], dtype=float)
    rng = np.random.default_rng(3)
    for s in (0.5, 2.0, 6.0):
        w = B.factored(alg, s * c1)
        z = rng.normal(size=alg.n)
        x = s * float(alg.inner(z, c1))
        if abs(x) > 25:
            continue
        got = B.bessel_J(alg, lam, z, w).value
        assert abs(got - oracle("J", float(lam), x)) <= 1e-10 * max(1.0, abs(oracle("J", float(lam), x)))


@pytest.mark.parametrize("name", ["real", "spin:4", "sym:2", "herm:3"])
def test_value_at_zero(name):
    alg = get_algebra(name)
    w = B.factored(alg, np.asarray(alg.unit, dtype=float))
    z = np.zeros(alg.n)
    lam = mpq(alg.n, alg.r) + mpq(1, 3)
    assert B.bessel_J(alg, lam, z, w).value == pytest.approx(1.0, abs=1e-15)
    assert B.bessel_I(alg, lam, z, w).value == pytest.approx(1.0, abs=1e-15)


@given(st.floats(0.1, 3), st.floats(0.1, 3), st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 2))
def test_symmetry_totally_real(a1, a2, b1, b2, t):
    alg = get_algebra("sym:2")
    lam = 1.5 + t
    fr = [np.asarray(c, dtype=float) for c in alg.frame]
    z = a1 * fr[0] + a2 * fr[1]
    w = abs(b1) * fr[0] + abs(b2) * fr[1]
    lhs = B.bessel_J(alg, lam, z, B.factored(alg, w)).value
    rhs = B.bessel_J(alg, lam, w, B.factored(alg, z)).value
    assert abs(lhs - np.conj(rhs)) <= 1e-10 * max(1.0, abs(lhs))


def test_structure_equivariance_frame_diagonal():
    alg = get_algebra("spin:4")
    fr = [np.asarray(c, dtype=float) for c in alg.frame]
    g = alg.pmat(1.3 * fr[0] + 0.6 * fr[1])
    rng = np.random.default_rng(8)
    z = rng.normal(size=alg.n)
    w = 0.9 * fr[0] + 0.4 * fr[1]
    lhs = B.bessel_J(alg, 2.5, g @ z, B.factored(alg, w)).value
    rhs = B.bessel_J(alg, 2.5, z, B.factored(alg, g @ w)).value
    assert abs(lhs - rhs) <= 1e-11 * max(1.0, abs(lhs))


@pytest.mark.parametrize("name", ["real", "spin:3", "herm:2"])
def test_laplace_identity_for_I(name):
    alg = get_algebra(name)
    lam = mpq(alg.n, alg.r) + mpq(7, 10)
    mu = Q.orbit_measure(alg, lam)
    y = alg.from_eigen([1.4, 1.1][: alg.r]).astype(float)
    fr = [np.asarray(c, dtype=float) for c in alg.frame]
    zpt = 0.5 * fr[0] + (0.2 * fr[1] if alg.r > 1 else 0)
    zf = B.factored(alg, zpt)
    # spot-check the vectorized kernel against the pointwise series
    x0 = alg.from_eigen([0.8, 0.3][: alg.r]).astype(float)
    dz = float(alg.det(zpt))
    k0 = B.kernel_many(alg, lam, x0 @ alg.gram_f @ zpt, float(alg.det(x0)) * dz, 1)[0]
    assert abs(k0 - B.bessel_I(alg, lam, x0, zf).value) <= 1e-12 * abs(k0)

    def f(x):
        tr = x @ alg.gram_f @ zpt
        kern = B.kernel_many(alg, lam, tr, alg.det_poly.eval_many(x) * dz, 1).real
        return np.exp(-(x @ alg.gram_f @ y)) * kern
    lhs = mu.integrate(f, zonal=True)
    rhs = 2 ** (alg.r * float(lam)) * float(alg.det(y)) ** (-float(lam)) * math.exp(float(alg.inner(alg.inverse(y), zpt)))
    assert abs(lhs / rhs - 1) <= 1e-6


@pytest.mark.parametrize("lam", [0.6, 1.0, 2.0, 3.5])
def test_k_real_matches_classical(lam):
    alg = get_algebra("real")
    for x in (0.05, 0.5, 1.0, 4.0, 12.0):
        t = 2 * math.sqrt(x)
        expect = 2 * special.kv(lam - 1, t) * (t / 2) ** (1 - lam)
        assert abs(B.bessel_K(alg, lam, np.array([x])) / expect - 1) <= 1e-8


def test_k_real_ode():
    # x K'' + lam K' = K
    alg = get_algebra("real")
    lam, h = 1.7, 1e-3
    for x in (0.6, 1.5, 3.0):
        k = lambda s: B.bessel_K(alg, lam, np.array([s]))
        d1 = (k(x + h) - k(x - h)) / (2 * h)
        d2 = (k(x + h) - 2 * k(x) + k(x - h)) / h ** 2
        assert abs(x * d2 + lam * d1 - k(x)) <= 1e-5 * k(x)


@pytest.mark.parametrize("name", ["spin:3", "spin:5", "sym:2", "herm:2"])
def test_k_boundary_rank_one(name):
    alg = get_algebra(name)
    lam = mpq(alg.d, 2)
    c1 = np.asarray(alg.frame[0], dtype=float)
    # the complementary cone Omega_0 is R_+ and n_0/r_0 + d/2 - lam = 1
    const = (2 * math.pi) ** (alg.d / 2)
    for t in (0.3, 1.0, 5.0):
        s = 2 * math.sqrt(t)
        expect = const * 2 * special.kv(float(lam) - 1, s) * (s / 2) ** (1 - float(lam))
        got = B.bessel_K_boundary(alg, lam, t * c1)
        assert abs(got / expect - 1) <= 1e-8


def test_k_boundary_rejects_wrong_rank():
    alg = get_algebra("spin:3")
    with pytest.raises(errors.RankMismatch):
        B.bessel_K_boundary(alg, mpq(1, 2), np.asarray(alg.unit, dtype=float))
    with pytest.raises(errors.NotInWallachSet):
        B.bessel_K_boundary(alg, mpq(7, 3), np.asarray(alg.frame[0], dtype=float))


def test_k_interior_rejects_boundary_point():
    alg = get_algebra("sym:2")
    with pytest.raises(errors.NotInClosedCone):
        B.bessel_K(alg, 2, np.asarray(alg.frame[0], dtype=float))


def test_omega_depends_only_on_a():
    alg = get_algebra("spin:3")
    lam = mpq(17, 10)
    a = alg.from_eigen([1.2, 0.5]).astype(float)
    base = B.omega(alg, lam, B.factored(alg, a))
    for u in Q.haar_U(alg, 4, 9):
        assert B.omega(alg, lam, B.factored(alg, a, u)) == base
    assert base > 0


def test_omega_rank_one():
    alg = get_algebra("real")
    lam = 2.25
    for a in (0.3, 1.0, 4.0):
        expect = 2 * special.kv(lam - 1, a) * (a / 2) ** (1 - lam)
        assert abs(B.omega(alg, lam, B.factored(alg, np.array([a]))) / expect - 1) <= 1e-8


@pytest.mark.parametrize("name,lam", [("real", mpq(3, 2)), ("spin:3", mpq(1, 2)), ("spin:4", mpq(5, 2)),
                                      ("sym:2", mpq(1, 2)), ("herm:2", mpq(1)), ("sym:3", mpq(1))])
@pytest.mark.parametrize("sign", [1, -1])
def test_ode_residual_in_top_shell(name, lam, sign):
    alg = get_algebra(name)
    k = orbit_rank(alg, lam)
    N = 4
    eig = [mpq(3, 2), mpq(1, 2), mpq(1, 3)]
    b = alg.from_eigen([eig[i] if i < k else mpq(0) for i in range(alg.r)])
    w = alg.mul(b, b)
    P = B.bessel_truncated_poly(alg, lam, b, N, sign)
    assert P.degree == N
    for a in range(alg.n):
        v = alg._basis(a)
        res = bessel_pair(alg, v, lam).apply(P) - P.scale(sign * alg.inner(v, w))
        res = _mod_ideal(alg, k, res)
        assert all(sum(e) == N for e in res.terms)


def test_ode_negative_control_wrong_sign():
    alg = get_algebra("spin:3")
    lam = mpq(5, 2)
    b = alg.from_eigen([mpq(3, 2), mpq(1, 2)])
    w = alg.mul(b, b)
    P = B.bessel_truncated_poly(alg, lam, b, 4, 1)
    v = alg._basis(0)
    res = bessel_pair(alg, v, lam).apply(P) + P.scale(alg.inner(v, w))
    assert any(sum(e) < 4 for e in res.terms)
