import numpy as np
import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from jfx import errors
from jfx.exact import exact_array
from jfx.jordan import get_algebra, shipped_algebras

ALL = shipped_algebras()

TABLE = {
    "real": (1, 1, 0),
    "spin:3": (3, 2, 1),
    "spin:4": (4, 2, 2),
    "spin:5": (5, 2, 3),
    "spin:6": (6, 2, 4),
    "sym:2": (3, 2, 1),
    "sym:3": (6, 3, 1),
    "sym:4": (10, 4, 1),
    "herm:2": (4, 2, 2),
    "herm:3": (9, 3, 2),
}

small_q = st.builds(lambda a, b: mpq(a, b), st.integers(-6, 6), st.integers(1, 4))


def rational_element(alg):
    return st.lists(small_q, min_size=alg.n, max_size=alg.n).map(exact_array)


@pytest.mark.parametrize("name", ALL)
def test_catalog_dimensions(name):
    alg = get_algebra(name)
    assert (alg.n, alg.r, alg.d) == TABLE[name]


@pytest.mark.parametrize("name", ALL)
def test_sum_of_basis_squares(name):
    # sum over an orthonormal basis of e_a^2 is (n/r) e; with a Gram matrix G
    # this reads sum_ab G^{-1}_ab e_a e_b
    alg = get_algebra(name)
    acc = alg.zero()
    for a in range(alg.n):
        for b in range(alg.n):
            if alg.gram_inv[a, b] != 0:
                acc = acc + alg.mul(alg._basis(a), alg._basis(b)) * alg.gram_inv[a, b]
    assert all(acc == alg.unit * alg.n_over_r)


@pytest.mark.parametrize("name", ALL)
def test_unit_trace_det(name):
    alg = get_algebra(name)
    assert alg.trace(alg.unit) == alg.r
    assert alg.det(alg.unit) == 1
    assert all(alg.inverse(alg.unit) == alg.unit)


def test_spin_product_formula():
    alg = get_algebra("spin:4")
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=4), rng.normal(size=4)
    expect = np.concatenate([[x[0] * y[0] + x[1:] @ y[1:]], x[0] * y[1:] + y[0] * x[1:]])
    assert np.allclose(alg.mul(x, y), expect)


def test_sym2_product_is_symmetrized_matrix_product():
    alg = get_algebra("sym:2")
    rng = np.random.default_rng(1)
    for _ in range(5):
        X, Y = rng.normal(size=(2, 2)), rng.normal(size=(2, 2))
        X, Y = X + X.T, Y + Y.T
        x, y = alg.coords_from_matrix(X), alg.coords_from_matrix(Y)
        got = alg.matrix_of(alg.mul(x, y))
        assert np.allclose(got, (X @ Y + Y @ X) / 2)


@pytest.mark.parametrize("name", ["spin:3", "sym:2", "herm:2", "sym:3", "spin:5"])
@given(data=st.data())
def test_jordan_identity_exact(name, data):
    alg = get_algebra(name)
    x = data.draw(rational_element(alg))
    y = data.draw(rational_element(alg))
    x2 = alg.square(x)
    assert all(alg.mul(alg.mul(x, y), x2) == alg.mul(x, alg.mul(y, x2)))
    assert all(alg.mul(x, y) == alg.mul(y, x))


@pytest.mark.parametrize("name", ["spin:3", "sym:2", "herm:2", "sym:3"])
@given(data=st.data())
def test_trace_form_associative(name, data):
    alg = get_algebra(name)
    x, y, z = (data.draw(rational_element(alg)) for _ in range(3))
    assert alg.inner(alg.mul(x, y), z) == alg.inner(x, alg.mul(y, z))


@pytest.mark.parametrize("name", ["spin:3", "spin:4", "sym:2", "sym:3", "herm:2"])
def test_pmat_determinant_and_lmat_trace(name):
    alg = get_algebra(name)
    rng = np.random.default_rng(2)
    for _ in range(4):
        x = rng.normal(size=alg.n)
        assert np.isclose(np.linalg.det(alg.pmat(x)), complex(alg.det(x)).real ** (2 * alg.n / alg.r), rtol=1e-8)
        assert np.isclose(np.trace(alg.lmat(x)), alg.n / alg.r * alg.trace(x))


def test_pmat_of_unit_is_identity():
    for name in ALL:
        alg = get_algebra(name)
        P = alg.pmat(alg.unit)
        assert all(P[i, j] == (1 if i == j else 0) for i in range(alg.n) for j in range(alg.n))


def test_spin_det_and_inverse():
    alg = get_algebra("spin:4")
    x = exact_array([mpq(3), mpq(1), mpq(-1, 2), mpq(2, 3)])
    det = x[0] ** 2 - sum(v * v for v in x[1:])
    assert alg.det(x) == det
    inv = alg.inverse(x)
    assert all(inv == exact_array([x[0] / det] + [-v / det for v in x[1:]]))
    assert all(alg.mul(x, inv) == alg.unit)


def test_sym3_det_trace_minors_match_matrix_oracle():
    alg = get_algebra("sym:3")
    rng = np.random.default_rng(3)
    A = rng.normal(size=(3, 3))
    A = A + A.T
    x = alg.coords_from_matrix(A)
    assert np.isclose(complex(alg.det(x)).real, np.linalg.det(A))
    assert np.isclose(alg.trace(x), np.trace(A))
    for j in (1, 2, 3):
        assert np.isclose(complex(alg.principal_minor(j, x)).real, np.linalg.det(A[:j, :j]))


def test_spin_frame():
    alg = get_algebra("spin:5")
    c1, c2 = alg.frame
    assert list(c1) == [mpq(1, 2), mpq(1, 2), 0, 0, 0]
    assert all(alg.mul(c1, c1) == c1) and all(alg.mul(c1, c2) == alg.zero())
    assert all(c1 + c2 == alg.unit)


def test_peirce_dimensions_sym3():
    alg = get_algebra("sym:3")
    P1, Ph, P0 = alg.peirce(alg.frame[0])
    ranks = [np.linalg.matrix_rank(np.asarray(P, dtype=float)) for P in (P1, Ph, P0)]
    assert ranks == [1, 2, 3]


def test_peirce_rejects_non_idempotent():
    alg = get_algebra("sym:2")
    with pytest.raises(errors.NotIdempotent):
        alg.peirce(alg.unit * 2)


@pytest.mark.parametrize("name", ["spin:3", "sym:3", "herm:2"])
def test_spectral_reconstructs(name):
    alg = get_algebra(name)
    rng = np.random.default_rng(4)
    x = rng.normal(size=alg.n)
    sp = alg.spectral(x)
    assert np.all(np.diff(sp.eigenvalues) <= 1e-12)
    assert np.allclose(alg.from_eigen(list(sp.eigenvalues), sp.frame_rotation), x)
    assert np.isclose(np.prod(sp.eigenvalues), complex(alg.det(x)).real)


@pytest.mark.parametrize("name", ["spin:4", "sym:2", "herm:3"])
def test_square_root(name):
    alg = get_algebra(name)
    rng = np.random.default_rng(5)
    y = rng.normal(size=alg.n)
    x = alg.square(y) + 0.1 * alg.unit.astype(float)
    root = alg.power(x, 0.5)
    assert np.allclose(alg.square(root), x)


def test_power_rejects_outside_cone():
    alg = get_algebra("sym:2")
    with pytest.raises(errors.NegativeEigenvalue):
        alg.power(np.array([1.0, -1.0, 0.0]), 0.5)


def test_singular_inverse():
    alg = get_algebra("spin:3")
    with pytest.raises(errors.SingularElement):
        alg.inverse(alg.frame[0])


def test_unknown_algebra():
    with pytest.raises(ValueError):
        get_algebra("sym:9")
    with pytest.raises(ValueError):
        get_algebra("octonion:3")


def test_mismatched_lengths():
    alg = get_algebra("sym:2")
    with pytest.raises(errors.AlgebraMismatch):
        alg.mul(np.ones(3), np.ones(4))


def test_catalog_json_is_stable():
    alg = get_algebra("herm:2")
    assert alg.catalog_json() == get_algebra("herm:2").catalog_json()
    assert alg.catalog()["n"] == 4
