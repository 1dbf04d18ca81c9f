"""Concrete simple Euclidean Jordan algebras with exact structure tensors.

Shipped kinds: the real line, spin factors R^{1,k-1} (3 <= k <= 6), real
symmetric matrices Sym(k, R) (k <= 4) and complex Hermitian matrices
Herm(k, C) (k <= 3). Coordinates are taken with respect to a basis with
rational structure constants; the trace-form Gram matrix is stored exactly
and used everywhere instead of assuming orthonormality.

Element coordinates are plain numpy arrays: ``dtype=object`` holding mpq/QI
scalars selects exact arithmetic, float/complex arrays select numeric mode.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations

import numpy as np
from gmpy2 import mpq

from . import errors
from .exact import (
    ONE, QI, ZERO, I, conj, exact_array, eye, mat_inv, mat_is_zero, scalar_str, zeros,
)
from .poly import Poly

SHIPPED = {
    "real": [None],
    "spin": [3, 4, 5, 6],
    "sym": [2, 3, 4],
    "herm": [2, 3],
}


def _is_exact_array(x) -> bool:
    return isinstance(x, np.ndarray) and x.dtype == object


def _perm_sign(p) -> int:
    s, seen = 1, set()
    for i in range(len(p)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = p[j]
            length += 1
        if length % 2 == 0:
            s = -s
    return s


def _poly_det(rows):
    """Determinant of a small square matrix of Polys by permutation expansion."""
    k = len(rows)
    nv = rows[0][0].nvars
    out = Poly.zero(nv)
    for p in permutations(range(k)):
        term = Poly.const(nv, _perm_sign(p))
        for i in range(k):
            term = term * rows[i][p[i]]
            if term.is_zero():
                break
        out = out + term
    return out


@dataclass(frozen=True)
class Spectral:
    """x = frame_rotation @ sum_i eigenvalues[i] * c_i with eigenvalues sorted descending."""

    frame_rotation: np.ndarray
    eigenvalues: np.ndarray


class Algebra:
    """A simple Euclidean Jordan algebra with a fixed basis and Jordan frame."""

    def __init__(self, kind: str, k: int | None = None):
        if kind not in SHIPPED:
            raise ValueError(f"unknown algebra kind {kind!r}")
        if k not in SHIPPED[kind]:
            raise ValueError(f"{kind}:{k} is not a shipped algebra")
        self.kind = kind
        self.k = k
        self._matrix_basis = None
        builder = getattr(self, f"_build_{kind}")
        builder()
        self.n = len(self.labels)
        self.gram = zeros(self.n)
        for a in range(self.n):
            for b in range(self.n):
                self.gram[a, b] = self.trace(self.mul(self._basis(a), self._basis(b)))
        self.gram_inv = mat_inv(self.gram)
        self.gram_f = self.gram.astype(float)
        self.gram_inv_f = self.gram_inv.astype(float)
        self.C_f = self.C.astype(float)
        self.e = self.unit
        self._lmats = [self._lmat_exact(self._basis(a)) for a in range(self.n)]
        self._check_axioms()

    # ----------------------------------------------------------- builders
    def _build_real(self):
        self.name = "real"
        self.r, self.d = 1, 0
        self.labels = ["e"]
        self.C = np.empty((1, 1, 1), dtype=object)
        self.C[0, 0, 0] = ONE
        self.tr_vec = exact_array([1])
        self.unit = exact_array([1])
        self.frame = [exact_array([1])]
        x = Poly.var(1, 0)
        self.det_poly = x
        self.minor_polys = [x]

    def _build_spin(self):
        k = self.k
        self.name = f"spin:{k}"
        self.r, self.d = 2, k - 2
        self.labels = ["e0"] + [f"e{j}" for j in range(1, k)]
        C = np.empty((k, k, k), dtype=object)
        C.fill(ZERO)
        for a in range(k):
            C[0, a, a] = ONE
            C[a, 0, a] = ONE
        for a in range(1, k):
            C[a, a, 0] = ONE
        self.C = C
        self.tr_vec = exact_array([2] + [0] * (k - 1))
        self.unit = exact_array([1] + [0] * (k - 1))
        half = mpq(1, 2)
        c1 = exact_array([half, half] + [0] * (k - 2))
        c2 = exact_array([half, -half] + [0] * (k - 2))
        self.frame = [c1, c2]
        x = [Poly.var(k, i) for i in range(k)]
        det = x[0] * x[0]
        for j in range(1, k):
            det = det - x[j] * x[j]
        self.det_poly = det
        self.minor_polys = [x[0] + x[1], det]

    def _matrix_setup(self, complex_entries: bool):
        k = self.k
        basis, labels = [], []

        def unit(i, j, val=ONE):
            m = zeros(k)
            m[i, j] = val
            return m

        for i in range(k):
            basis.append(unit(i, i))
            labels.append(f"E{i + 1}{i + 1}")
        for i, j in combinations(range(k), 2):
            basis.append(unit(i, j) + unit(j, i))
            labels.append(f"S{i + 1}{j + 1}")
        if complex_entries:
            for i, j in combinations(range(k), 2):
                basis.append(unit(i, j, I) + unit(j, i, -I))
                labels.append(f"A{i + 1}{j + 1}")
        self._matrix_basis = basis
        self.labels = labels
        n = len(basis)
        C = np.empty((n, n, n), dtype=object)
        for a in range(n):
            for b in range(n):
                jp = (basis[a].dot(basis[b]) + basis[b].dot(basis[a])) * mpq(1, 2)
                coords = self.coords_from_matrix(jp)
                for c in range(n):
                    C[a, b, c] = coords[c]
        self.C = C
        tr = []
        for m in basis:
            t = ZERO
            for i in range(k):
                t = t + m[i, i]
            tr.append(t)
        self.tr_vec = exact_array(tr)
        self.unit = exact_array([1] * k + [0] * (n - k))
        self.frame = [exact_array([1 if a == i else 0 for a in range(n)]) for i in range(k)]
        self.r = k
        # polynomial matrix realization for determinants and minors
        zs = [Poly.var(n, a) for a in range(n)]
        M = [[Poly.zero(n) for _ in range(k)] for _ in range(k)]
        for a, m in enumerate(basis):
            for i in range(k):
                for j in range(k):
                    if m[i, j] != 0:
                        M[i][j] = M[i][j] + zs[a].scale(m[i, j])
        self._poly_matrix = M
        minors = []
        for j in range(1, k + 1):
            minors.append(self._realify(_poly_det([row[:j] for row in M[:j]])))
        self.minor_polys = minors
        self.det_poly = minors[-1]

    @staticmethod
    def _realify(p: Poly) -> Poly:
        re, im = p.real_imag()
        if not im.is_zero():
            raise AssertionError("determinant polynomial is not real")
        return re

    def _build_sym(self):
        self.name = f"sym:{self.k}"
        self.d = 1
        self._matrix_setup(complex_entries=False)

    def _build_herm(self):
        self.name = f"herm:{self.k}"
        self.d = 2
        self._matrix_setup(complex_entries=True)

    # ----------------------------------------------------- matrix realization
    @property
    def is_matrix_algebra(self) -> bool:
        return self._matrix_basis is not None

    def coords_from_matrix(self, m) -> np.ndarray:
        """Coordinates of a (complexified) matrix in the stored basis."""
        k = self.k
        exact = m.dtype == object
        out = []
        for i in range(k):
            out.append(m[i, i])
        half = mpq(1, 2) if exact else 0.5
        pairs = list(combinations(range(k), 2))
        for i, j in pairs:
            out.append((m[i, j] + m[j, i]) * half)
        if self.kind == "herm":
            for i, j in pairs:
                diff = m[i, j] - m[j, i]
                out.append(diff * QI(0, mpq(-1, 2)) if exact else diff * (-0.5j))
        arr = np.array(out, dtype=object if exact else np.result_type(m.dtype, np.float64))
        if self.kind == "herm" and not exact:
            arr = arr.astype(np.complex128)
        return arr

    def matrix_of(self, x) -> np.ndarray:
        """Matrix realization of coordinates x (exact or numeric)."""
        if _is_exact_array(x):
            m = zeros(self.k)
            for a, b in enumerate(self._matrix_basis):
                if x[a] != 0:
                    m = m + b * x[a]
            return m
        mb = self._matrix_basis_numeric()
        return np.tensordot(np.asarray(x), mb, axes=(0, 0))

    def _matrix_basis_numeric(self):
        if not hasattr(self, "_mb_numeric"):
            self._mb_numeric = np.array([[[complex(v) for v in row] for row in b] for b in self._matrix_basis])
        return self._mb_numeric

    def matrix_action(self, g, h=None) -> np.ndarray:
        """Coordinate matrix of X -> g X h^T (h defaults to g; numeric or exact)."""
        h = g if h is None else h
        exact = g.dtype == object
        cols = []
        for a in range(self.n):
            if exact:
                xa = self.matrix_of(self._basis(a))
                y = g.dot(xa).dot(h.T)
            else:
                xa = self._matrix_basis_numeric()[a]
                y = g @ xa @ h.T
            cols.append(self.coords_from_matrix(y))
        return np.array(cols, dtype=object if exact else np.complex128).T

    # ----------------------------------------------------------- axioms
    def _basis(self, a) -> np.ndarray:
        v = zeros(1, self.n).reshape(self.n)
        v[a] = ONE
        return v

    def _check_axioms(self):
        n = self.n
        C = self.C
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    if C[a, b, c] != C[b, a, c]:
                        raise AssertionError(f"{self.name}: product not commutative")
        for a in range(n):
            if any(v != w for v, w in zip(self.mul(self.unit, self._basis(a)), self._basis(a))):
                raise AssertionError(f"{self.name}: unit fails")
        L = self._lmats
        # the linearized Jordan identity is symmetric in its three arguments
        for a in range(n):
            for b in range(a, n):
                for c in range(b, n):
                    acc = zeros(n)
                    for (x, y, z) in ((a, c, b), (c, b, a), (b, a, c)):
                        lxz = self._lmat_exact(self.mul(self._basis(x), self._basis(z)))
                        acc = acc + lxz.dot(L[y]) - L[y].dot(lxz)
                    if not mat_is_zero(acc):
                        raise AssertionError(f"{self.name}: Jordan identity fails")
        for i, ci in enumerate(self.frame):
            if not self.equal(self.mul(ci, ci), ci):
                raise AssertionError(f"{self.name}: frame element not idempotent")
            for j in range(i + 1, len(self.frame)):
                if not self.equal(self.mul(ci, self.frame[j]), zeros(1, n).reshape(n)):
                    raise AssertionError(f"{self.name}: frame not orthogonal")
        if not self.equal(sum(self.frame[1:], self.frame[0]), self.unit):
            raise AssertionError(f"{self.name}: frame does not sum to e")
        if n != self.r + self.r * (self.r - 1) * self.d // 2:
            raise AssertionError(f"{self.name}: dimension formula fails")

    @staticmethod
    def equal(x, y, tol=0.0) -> bool:
        if _is_exact_array(x) and _is_exact_array(y):
            return all(u == v for u, v in zip(x, y))
        return bool(np.allclose(np.asarray(x, dtype=complex), np.asarray(y, dtype=complex), atol=tol or 1e-12))

    # ------------------------------------------------------------ constants
    @property
    def n_over_r(self) -> mpq:
        return mpq(self.n, self.r)

    def zero(self) -> np.ndarray:
        return zeros(1, self.n).reshape(self.n)

    def element(self, coords) -> np.ndarray:
        return exact_array(list(coords))

    def from_eigen(self, a, k=None) -> np.ndarray:
        """sum_i a_i c_i, optionally moved by a coordinate matrix k."""
        exact = all(isinstance(v, (int, QI)) or type(v) is type(ZERO) for v in a)
        if exact:
            x = self.zero()
            for ai, ci in zip(a, self.frame):
                x = x + ci * ai
        else:
            x = np.zeros(self.n, dtype=np.result_type(*[np.asarray(v).dtype for v in a], np.float64))
            for ai, ci in zip(a, self.frame):
                x = x + ci.astype(float) * ai
        if k is not None:
            x = k.dot(x) if _is_exact_array(k) else np.asarray(k) @ x
        return x

    # ----------------------------------------------------------- products
    def _tensor(self, x):
        return self.C if _is_exact_array(x) else self.C_f

    def mul(self, x, y) -> np.ndarray:
        if len(x) != self.n or len(y) != self.n:
            raise errors.AlgebraMismatch("element length does not match the algebra")
        if _is_exact_array(x) or _is_exact_array(y):
            x = x if _is_exact_array(x) else exact_array(x)
            y = y if _is_exact_array(y) else exact_array(y)
            out = self.zero()
            C = self.C
            for a in range(self.n):
                if x[a] == 0:
                    continue
                for b in range(self.n):
                    if y[b] == 0:
                        continue
                    xy = x[a] * y[b]
                    for c in range(self.n):
                        if C[a, b, c] != 0:
                            out[c] = out[c] + xy * C[a, b, c]
            return out
        return np.einsum("a,b,abc->c", x, y, self.C_f)

    def square(self, x):
        return self.mul(x, x)

    def _lmat_exact(self, x) -> np.ndarray:
        n = self.n
        m = zeros(n)
        for a in range(n):
            if x[a] == 0:
                continue
            for b in range(n):
                for c in range(n):
                    if self.C[a, b, c] != 0:
                        m[c, b] = m[c, b] + x[a] * self.C[a, b, c]
        return m

    def lmat(self, x) -> np.ndarray:
        """Matrix of L(x) acting on coordinate vectors."""
        if _is_exact_array(x):
            return self._lmat_exact(x)
        return np.einsum("a,abc->cb", x, self.C_f)

    def pmat(self, x) -> np.ndarray:
        L = self.lmat(x)
        L2 = self.lmat(self.mul(x, x))
        return L.dot(L) * 2 - L2

    def pmat2(self, x, y) -> np.ndarray:
        Lx, Ly = self.lmat(x), self.lmat(y)
        return Lx.dot(Ly) + Ly.dot(Lx) - self.lmat(self.mul(x, y))

    def box(self, x, y) -> np.ndarray:
        Lx, Ly = self.lmat(x), self.lmat(y)
        return self.lmat(self.mul(x, y)) + Lx.dot(Ly) - Ly.dot(Lx)

    # ------------------------------------------------- trace, det, inner
    def trace(self, x):
        if _is_exact_array(x):
            t = ZERO
            for a in range(self.n):
                if x[a] != 0:
                    t = t + self.tr_vec[a] * x[a]
            return t
        return np.asarray(x) @ self.tr_vec.astype(float)

    def inner(self, x, y):
        """Trace form (x|y), complex-bilinear on the complexification."""
        if _is_exact_array(x) or _is_exact_array(y):
            x = x if _is_exact_array(x) else exact_array(x)
            y = y if _is_exact_array(y) else exact_array(y)
            return x.dot(self.gram).dot(y)
        return np.asarray(x) @ self.gram_f @ np.asarray(y)

    def hinner(self, z, w):
        """Hermitian form (z|conj w) on the complexification."""
        if _is_exact_array(w):
            return self.inner(z, np.array([conj(v) for v in w], dtype=object))
        return self.inner(z, np.conj(w))

    def norm(self, z) -> float:
        return float(np.sqrt(abs(complex(self.hinner(np.asarray(z, dtype=complex), np.asarray(z, dtype=complex))))))

    def det(self, x):
        return self.det_poly.eval(x)

    def principal_minor(self, j: int, z):
        if not 1 <= j <= self.r:
            raise ValueError("minor index out of range")
        return self.minor_polys[j - 1].eval(z)

    def adjoint(self, T) -> np.ndarray:
        """T^# with respect to the trace form: G^{-1} T^t G."""
        if _is_exact_array(T):
            return self.gram_inv.dot(T.T).dot(self.gram)
        return self.gram_inv_f @ np.asarray(T).T @ self.gram_f

    # ------------------------------------------------ inverse and powers
    def inverse(self, x) -> np.ndarray:
        if _is_exact_array(x):
            if self.det(x) == 0:
                raise errors.SingularElement("element is not invertible")
            return mat_inv(self.pmat(x)).dot(x)
        P = self.pmat(x)
        dx = self.det(x)
        if abs(dx) < 1e-300:
            raise errors.SingularElement("element is not invertible")
        return np.linalg.solve(P, x)

    def power(self, x, s) -> np.ndarray:
        """x^s for x in the closed cone; exact for nonnegative integer s."""
        if isinstance(s, int) and s >= 0:
            out = self.unit.copy() if _is_exact_array(x) else self.unit.astype(float)
            for _ in range(s):
                out = self.mul(out, x)
            return out
        sp = self.spectral(np.asarray(x, dtype=float))
        a = sp.eigenvalues
        tol = 1e-12 * max(1.0, float(np.max(np.abs(a))))
        if np.any(a < -tol):
            raise errors.NegativeEigenvalue("element is not in the closed cone")
        a = np.clip(a, 0.0, None)
        if s < 0 and np.any(a <= tol):
            raise errors.NegativeEigenvalue("negative power of a boundary element")
        with np.errstate(divide="ignore"):
            vals = np.where(a > 0, a ** float(s), 0.0 if s > 0 else 1.0)
        return self.from_eigen(list(vals), sp.frame_rotation)

    # ----------------------------------------------------------- spectral
    def spectral(self, x) -> Spectral:
        x = np.asarray(x, dtype=float)
        if self.kind == "real":
            return Spectral(np.eye(1), np.array([x[0]]))
        if self.kind == "spin":
            xs = x[1:]
            rho = float(np.linalg.norm(xs))
            k = self.n
            R = np.eye(k)
            if rho > 0:
                R[1:, 1:] = _rotation_taking(np.eye(k - 1)[0], xs / rho)
            return Spectral(R, np.array([x[0] + rho, x[0] - rho]))
        M = self.matrix_of(x)
        if self.kind == "sym":
            M = M.real
        w, V = np.linalg.eigh(M)
        order = np.argsort(w)[::-1]
        w, V = w[order], V[:, order]
        if self.kind == "sym" and np.linalg.det(V) < 0:
            V[:, -1] = -V[:, -1]
        if self.kind == "herm":
            K = self.matrix_action(V, V.conj())
            K = K.real
        else:
            K = self.matrix_action(V).real
        return Spectral(K, w)

    def rank_of(self, x, tol=1e-9) -> int:
        a = self.spectral(x).eigenvalues
        scale = max(1.0, float(np.max(np.abs(a))))
        return int(np.sum(np.abs(a) > tol * scale))

    # -------------------------------------------------------------- Peirce
    def peirce(self, c):
        """Projections onto the 1, 1/2 and 0 eigenspaces of L(c)."""
        cc = self.mul(c, c)
        if _is_exact_array(c):
            if not self.equal(cc, c):
                raise errors.NotIdempotent("element is not idempotent")
            L = self.lmat(c)
            one = eye(self.n)
        else:
            if not np.allclose(cc, c, atol=1e-10):
                raise errors.NotIdempotent("element is not idempotent")
            L = self.lmat(c)
            one = np.eye(self.n)
        P1 = L.dot(L * 2 - one)
        Ph = L.dot(one - L) * 4
        P0 = (one - L).dot(one - L * 2)
        return P1, Ph, P0

    def partial_unit(self, k: int) -> np.ndarray:
        """e_k = c_1 + ... + c_k (the zero element for k = 0)."""
        x = self.zero()
        for c in self.frame[:k]:
            x = x + c
        return x

    # ------------------------------------------------------- Lie algebras
    @property
    def der_basis(self) -> list:
        if not hasattr(self, "_der"):
            from .exact import Echelon

            ech = Echelon()
            basis = []
            n = self.n
            L = self._lmats
            for a in range(n):
                for b in range(a + 1, n):
                    D = L[a].dot(L[b]) - L[b].dot(L[a])
                    vec = {i * n + j: D[i, j] for i in range(n) for j in range(n) if D[i, j] != 0}
                    if ech.add(vec):
                        basis.append(D)
            self._der = basis
        return self._der

    @property
    def str_basis(self) -> list:
        """Rational basis of the structure algebra: derivations then L(e_a)."""
        return list(self.der_basis) + list(self._lmats)

    def is_derivation(self, D) -> bool:
        for a in range(self.n):
            for b in range(self.n):
                ea, eb = self._basis(a), self._basis(b)
                lhs = D.dot(self.mul(ea, eb))
                rhs = self.mul(D.dot(ea), eb) + self.mul(ea, D.dot(eb))
                if not self.equal(lhs, rhs):
                    return False
        return True

    def is_structure_element(self, g) -> bool:
        """P(gx, gy) = g P(x, y) g^# on all basis pairs."""
        gs = self.adjoint(g)
        for a in range(self.n):
            for b in range(a, self.n):
                ea, eb = self._basis(a), self._basis(b)
                lhs = self.pmat2(g.dot(ea), g.dot(eb))
                rhs = g.dot(self.pmat2(ea, eb)).dot(gs)
                if _is_exact_array(g):
                    if not mat_is_zero(lhs - rhs):
                        return False
                elif not np.allclose(lhs, rhs, atol=1e-9):
                    return False
        return True

    # ------------------------------------------------------- orbit ideals
    def orbit_ideal_generators(self, k: int) -> list[Poly]:
        """Rational polynomials cutting out the closure of the rank <= k orbit."""
        n = self.n
        if k >= self.r:
            return []
        if k == 0:
            return [Poly.var(n, a) for a in range(n)]
        if self.kind == "spin":
            return [self.det_poly]
        M = self._poly_matrix
        size = k + 1
        gens = []
        for rows in combinations(range(self.k), size):
            for cols in combinations(range(self.k), size):
                m = _poly_det([[M[i][j] for j in cols] for i in rows])
                re, im = m.real_imag()
                for p in (re, im):
                    if not p.is_zero():
                        gens.append(p)
        return gens

    # ----------------------------------------------------------- catalog
    def catalog(self) -> dict:
        n = self.n
        tensor = []
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    if self.C[a, b, c] != 0:
                        tensor.append([a, b, c, scalar_str(self.C[a, b, c])])
        return {
            "kind": self.name,
            "n": n,
            "r": self.r,
            "d": self.d,
            "basis": self.labels,
            "gram": [[scalar_str(v) for v in row] for row in self.gram],
            "structure_tensor": tensor,
            "frame": [[scalar_str(v) for v in c] for c in self.frame],
            "unit": [scalar_str(v) for v in self.unit],
        }

    def catalog_json(self) -> str:
        return json.dumps(self.catalog(), sort_keys=True)

    def __repr__(self):
        return f"Algebra({self.name}: n={self.n}, r={self.r}, d={self.d})"


def _rotation_taking(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """A rotation R in SO(m) with R u = v for unit vectors u, v."""
    m = len(u)
    c = float(u @ v)
    w = v - c * u
    s = float(np.linalg.norm(w))
    if s < 1e-15:
        if c > 0:
            return np.eye(m)
        # rotate by pi in a plane containing u
        R = np.eye(m)
        idx = int(np.argmax(np.abs(u)))
        other = (idx + 1) % m
        R[idx, idx] = R[other, other] = -1.0
        return R
    w = w / s
    R = np.eye(m) + (c - 1.0) * (np.outer(u, u) + np.outer(w, w)) + s * (np.outer(w, u) - np.outer(u, w))
    return R


@lru_cache(maxsize=None)
def get_algebra(spec: str) -> Algebra:
    """Parse 'real', 'spin:k', 'sym:k' or 'herm:k' and build (cached)."""
    spec = spec.strip().lower()
    if spec == "real":
        return Algebra("real")
    if ":" not in spec:
        raise ValueError(f"unknown algebra {spec!r}")
    kind, _, arg = spec.partition(":")
    try:
        k = int(arg)
    except ValueError as exc:
        raise ValueError(f"unknown algebra {spec!r}") from exc
    return Algebra(kind, k)


def shipped_algebras() -> list[str]:
    out = []
    for kind, ks in SHIPPED.items():
        for k in ks:
            out.append(kind if k is None else f"{kind}:{k}")
    return out
