import json
from math import comb

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from jfx import branching as BR
from jfx.diffops import drho
from jfx.jordan import get_algebra
from jfx.poly import Poly, monomials


def test_harmonic_dims_small():
    assert BR.harmonic_dim(3, 1) == 3
    assert BR.harmonic_dim(3, 2) == 5
    assert BR.harmonic_dim(2, 4) == 2
    assert BR.harmonic_dim(1, 0) == 1 and BR.harmonic_dim(1, 1) == 1 and BR.harmonic_dim(1, 2) == 0
    assert BR.harmonic_basis(2, 3).dim == 2
    assert BR.harmonic_basis(3, 2).dim == 5


@given(st.integers(1, 5), st.integers(0, 4))
def test_harmonic_basis_matches_formula(p, k):
    block = BR.harmonic_basis(p, k)
    assert block.dim == BR.harmonic_dim(p, k)
    lap = BR.laplacian(p, 0, p)
    for h in block.basis:
        assert lap.apply(h).is_zero()
        assert h.is_homogeneous() and h.degree == k


@pytest.mark.parametrize("n", [3, 4, 5])
def test_null_cone_graded_dims(n):
    model = BR.NullConeModel(n)
    assert model.lam == mpq(n - 2, 2)
    for deg in range(5):
        # dim C[Z]_deg - dim C[Z]_{deg-2}
        expect = comb(deg + n - 1, n - 1) - (comb(deg + n - 3, n - 1) if deg >= 2 else 0)
        assert model.graded_dim(deg) == model.graded_dim_formula(deg) == expect


def test_null_cone_reduction():
    model = BR.NullConeModel(4)
    z = [Poly.var(4, i) for i in range(4)]
    rel = z[0] * z[0] - z[1] * z[1] - z[2] * z[2] - z[3] * z[3]
    assert model.reduce(rel).is_zero()
    assert model.reduce(rel * z[2] + z[1]) == z[1]


@pytest.mark.parametrize("n,m,cap", [(4, 2, 4), (5, 3, 3), (6, 1, 3), (5, 4, 3)])
def test_decomposition_fills_quotient(n, m, cap):
    reports = BR.decompose(BR.NullConeModel(n), m, cap)
    assert all(r.ok for r in reports)
    assert [r.degree for r in reports] == list(range(cap + 1))


def test_decomposition_rejects_bad_split():
    with pytest.raises(ValueError):
        BR.decompose(BR.NullConeModel(4), 4, 2)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_direct_operators_match_drho(n):
    alg = get_algebra(f"spin:{n}")
    lam = mpq(n - 2, 2) + mpq(1, 3)
    for X in BR.subalgebra_elements(n):
        assert BR.rho_so(n, lam, X) == drho(alg, lam, BR.generic_element(alg, X))


def test_subalgebra_elements_count():
    # 3m vectors plus so(m-1)
    for m in (1, 2, 3, 4):
        assert len(BR.subalgebra_elements(m)) == 3 * m + (m - 1) * (m - 2) // 2


@pytest.mark.parametrize("kind", ["n", "center", "nbar", "rot"])
def test_branching_identity_each_family(kind):
    n, m, cap = 5, 3, 4
    for k in range(3):
        for X in BR.subalgebra_elements(m):
            if X.kind != kind:
                continue
            res = BR.branching_operator_check(n, m, k, X, cap)
            assert res.ok and res.checked > 0


def test_branching_negative_control():
    n, m, cap, k = 5, 3, 3, 1
    model = BR.NullConeModel(n)
    H = BR.harmonic_basis(n - m, k, n, m)
    bad = 0
    for X in BR.subalgebra_elements(m):
        if X.kind != "nbar":
            continue
        big = model.rho(BR.embed(X, n))
        wrong = BR.rho_so(m, model.lam + k + 1, X, nvars=n)
        for deg in range(k, cap + 1):
            for e in monomials(m, deg - k):
                f = Poly.monomial(tuple(e) + (0,) * (n - m))
                for h in H.basis:
                    if not model.reduce(big.apply(f * h) - wrong.apply(f) * h).is_zero():
                        bad += 1
    assert bad > 0


def test_theorem_check_report():
    rep = BR.theorem_check(4, cap=3, kmax=2)
    assert rep["ok"] and rep["lambda"] == "1"
    assert [s["m"] for s in rep["splits"]] == [1, 2, 3]
    again = json.loads(BR.report_json(rep))
    assert again == json.loads(BR.report_json(BR.theorem_check(4, cap=3, kmax=2)))
