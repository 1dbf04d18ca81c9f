"""Spherical polynomials, K-type spaces and the related special polynomials.

All constructions are exact over Q. Results are memoized per algebra; the
caches are guarded by a lock so concurrent readers see either nothing or a
finished value.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import total_ordering

import numpy as np
import scipy.sparse as sp
from gmpy2 import mpq

from . import errors
from .exact import ONE, ZERO, Q, conj, is_exact, nullspace, solve
from .jordan import Algebra
from .poly import MonomialIndex, Poly, count_monomials

DEFAULT_DEGREE_CAP = 6

# rank computations for the K-type closure run modulo this prime; vectors
# found independent there are independent over Q as well
_PRIME = 67108859


# ------------------------------------------------------------------ partitions

@total_ordering
@dataclass(frozen=True)
class Partition:
    parts: tuple

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p < 0 for p in parts) or any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError(f"not a partition: {parts}")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def of(cls, parts, r: int | None = None) -> "Partition":
        parts = tuple(parts)
        if r is not None:
            if len(parts) > r and any(parts[r:]):
                raise errors.RankMismatch(f"partition {parts} has more than {r} parts")
            parts = (parts + (0,) * r)[:r]
        return cls(parts)

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def r(self) -> int:
        return len(self.parts)

    def vanishes_beyond(self, k: int) -> bool:
        """True when m_{k+1} = ... = m_r = 0."""
        return all(p == 0 for p in self.parts[k:])

    def contains(self, other: "Partition") -> bool:
        return all(a >= b for a, b in zip(self.parts, other.parts))

    def __lt__(self, other):
        return (self.weight, self.parts) < (other.weight, other.parts)

    def __iter__(self):
        return iter(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def __str__(self):
        return "(" + ",".join(map(str, self.parts)) + ")"


def partitions(weight: int, r: int, max_part: int | None = None) -> list[Partition]:
    """Partitions of ``weight`` with at most r parts, in decreasing lexicographic order."""
    max_part = weight if max_part is None else max_part
    out = []

    def rec(remaining, slots, cap, prefix):
        if remaining == 0:
            out.append(Partition(tuple(prefix) + (0,) * slots))
            return
        if slots == 0:
            return
        for p in range(min(cap, remaining), 0, -1):
            rec(remaining - p, slots - 1, p, prefix + [p])

    rec(weight, r, max_part, [])
    return out


def partitions_upto(N: int, r: int, k: int | None = None) -> list[Partition]:
    """All partitions of weight <= N; with k given, only those with m_{k+1} = 0."""
    out = []
    for w in range(N + 1):
        for m in partitions(w, r):
            if k is None or m.vanishes_beyond(k):
                out.append(m)
    return out


def as_partition(alg: Algebra, m) -> Partition:
    if isinstance(m, Partition):
        if m.r != alg.r:
            raise errors.RankMismatch(f"partition {m} does not have {alg.r} parts")
        return m
    return Partition.of(m, alg.r)


# ----------------------------------------------------------------- Pochhammer

def pochhammer1(a, k: int):
    out = ONE if is_exact(a) else 1.0
    for j in range(k):
        out = out * (a + j)
    return out


def pochhammer(lam, m, d) -> object:
    """Generalized Pochhammer symbol prod_i (lam - (i-1)d/2)_{m_i}."""
    exact = is_exact(lam) and is_exact(d)
    half_d = mpq(d) / 2 if exact else float(d) / 2
    out = ONE if exact else 1.0
    for i, mi in enumerate(m):
        out = out * pochhammer1(lam - i * half_d, mi)
    return out


def wallach_discrete_index(alg: Algebra, lam) -> int | None:
    """k if lam = k d/2 is a discrete Wallach point (k < r), otherwise None."""
    for k in range(alg.r):
        hit = (lam == mpq(k * alg.d, 2)) if is_exact(lam) else abs(float(lam) - k * alg.d / 2) < 1e-12
        if hit:
            return k
    return None


def check_wallach(alg: Algebra, lam) -> int | None:
    """Return the orbit index for discrete lam, None for continuous lam; raise otherwise."""
    k = wallach_discrete_index(alg, lam)
    if k is not None:
        return k
    edge = mpq((alg.r - 1) * alg.d, 2)
    if (lam > edge) if is_exact(lam) else float(lam) > float(edge):
        return None
    raise errors.NotInWallachSet(f"lambda={lam} is not in the Wallach set of {alg.name}")


def wallach_points(alg: Algebra) -> list:
    return [mpq(k * alg.d, 2) for k in range(alg.r)]


# ----------------------------------------------------------- vector fields

def apply_linear_field(p: Poly, T) -> Poly:
    """The derivative of p along the linear vector field x -> T x."""
    n = p.nvars
    nz = [[(b, T[a, b]) for b in range(n) if T[a, b] != 0] for a in range(n)]
    out: dict = {}
    for e, c in p.terms.items():
        for a in range(n):
            ea = e[a]
            if not ea:
                continue
            base = list(e)
            base[a] -= 1
            ca = c * ea
            for b, t in nz[a]:
                base[b] += 1
                key = tuple(base)
                base[b] -= 1
                v = out.get(key, ZERO) + ca * t
                if v != 0:
                    out[key] = v
                else:
                    out.pop(key, None)
    return Poly._raw(n, out)


def _field_matrix_mod(T, nvars: int, index: MonomialIndex) -> sp.csr_matrix:
    n = nvars
    Tm = np.zeros((n, n), dtype=np.int64)
    for a in range(n):
        for b in range(n):
            t = Q(T[a, b])
            if t != 0:
                Tm[a, b] = int(t.numerator) % _PRIME * pow(int(t.denominator), -1, _PRIME) % _PRIME
    rows, cols, vals = [], [], []
    for j, e in enumerate(index.exps):
        for a in range(n):
            ea = e[a]
            if not ea:
                continue
            base = list(e)
            base[a] -= 1
            for b in range(n):
                if Tm[a, b]:
                    base[b] += 1
                    rows.append(index.index[tuple(base)])
                    base[b] -= 1
                    cols.append(j)
                    vals.append(ea * Tm[a, b] % _PRIME)
    M = len(index)
    A = sp.coo_matrix((np.array(vals, dtype=np.int64), (rows, cols)), shape=(M, M)).tocsr()
    A.sum_duplicates()
    A.data %= _PRIME
    return A


# -------------------------------------------------------------- the engine

@dataclass
class KTypeBasis:
    """A basis of the K-type P_m together with its Fischer Gram matrix (lazy)."""

    alg: Algebra
    partition: Partition
    _provenance: list
    _polys: list = field(default_factory=list)
    _gram: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return len(self._provenance)

    @property
    def basis_polys(self) -> list[Poly]:
        if len(self._polys) < self.dim:
            ops = self.alg.str_basis
            polys = []
            for parent, op in self._provenance:
                if parent is None:
                    polys.append(delta_m(self.alg, self.partition))
                else:
                    polys.append(apply_linear_field(polys[parent], ops[op]))
            self._polys = polys
        return self._polys

    @property
    def gram(self) -> np.ndarray:
        if self._gram is None:
            ps = self.basis_polys
            g = np.empty((self.dim, self.dim), dtype=object)
            for i in range(self.dim):
                for j in range(i, self.dim):
                    g[i, j] = fischer(self.alg, ps[i], ps[j])
                    g[j, i] = conj(g[i, j])
            self._gram = g
        return self._gram


class PolyEngine:
    """Per-algebra memoized polynomial constructions."""

    def __init__(self, alg: Algebra, degree_cap: int = DEFAULT_DEGREE_CAP):
        self.alg = alg
        self.degree_cap = degree_cap
        self._lock = threading.Lock()
        self._cache: dict = {}
        self._coord_polys = [Poly.var(alg.n, a) for a in range(alg.n)]

    # ------------------------------------------------------------ caching
    def _memo(self, key, build):
        val = self._cache.get(key)
        if val is None:
            val = build()
            with self._lock:
                val = self._cache.setdefault(key, val)
        return val

    def _check_cap(self, m: Partition):
        if m.weight > self.degree_cap:
            raise errors.DegreeCapExceeded(f"|m|={m.weight} exceeds the degree cap {self.degree_cap}")

    # ----------------------------------------------------- basic polynomials
    def minor(self, j: int) -> Poly:
        return self.alg.minor_polys[j - 1]

    def delta_m(self, m) -> Poly:
        m = as_partition(self.alg, m)

        def build():
            p = Poly.const(self.alg.n, ONE)
            parts = list(m) + [0]
            for j in range(1, self.alg.r + 1):
                ex = parts[j - 1] - parts[j]
                if ex:
                    p = p * self.minor(j) ** ex
            return p

        return self._memo(("delta", m), build)

    def trace_power(self, j: int) -> Poly:
        """tr(x^j) as a polynomial in the coordinates."""

        def build():
            x = np.array(self._coord_polys, dtype=object)
            y = np.array(self._coord_polys, dtype=object)
            for _ in range(j - 1):
                y = self.alg.mul(y, x)
            t = Poly.zero(self.alg.n)
            for a in range(self.alg.n):
                if self.alg.tr_vec[a] != 0:
                    t = t + y[a] * self.alg.tr_vec[a]
            return t

        return self._memo(("trpow", j), build)

    def invariant_basis(self, N: int) -> list[Poly]:
        """Products of tr(x^j), j <= r, spanning the K^L-invariant polynomials of degree N."""

        def build():
            r = self.alg.r
            out = []
            for mu in partitions(N, N, max_part=r):
                p = Poly.const(self.alg.n, ONE)
                for part in mu:
                    if part:
                        p = p * self.trace_power(part)
                out.append(p)
            return out

        return self._memo(("invbasis", N), build)

    # ------------------------------------------------------------ K-types
    def ktype_basis(self, m) -> KTypeBasis:
        m = as_partition(self.alg, m)
        self._check_cap(m)
        return self._memo(("ktype", m), lambda: self._build_ktype(m))

    def _field_mats(self, N: int):
        def build():
            idx = MonomialIndex(self.alg.n, N)
            return idx, [_field_matrix_mod(T, self.alg.n, idx) for T in self.alg.str_basis]

        return self._memo(("fields", N), build)

    def _build_ktype(self, m: Partition) -> KTypeBasis:
        N = m.weight
        idx, mats = self._field_mats(N)
        M = len(idx)
        start = np.zeros(M, dtype=np.int64)
        for e, c in self.delta_m(m).terms.items():
            c = Q(c)
            start[idx.index[e]] = int(c.numerator) % _PRIME * pow(int(c.denominator), -1, _PRIME) % _PRIME
        ech = _ModEchelon(M)
        provenance = []
        vectors = []
        if ech.add(start):
            provenance.append((None, None))
            vectors.append(start)
        frontier = [0]
        while frontier:
            new = []
            for i in frontier:
                v = vectors[i]
                for op, A in enumerate(mats):
                    w = A.dot(v) % _PRIME
                    if w.any() and ech.add(w):
                        provenance.append((i, op))
                        vectors.append(w)
                        new.append(len(vectors) - 1)
            frontier = new
        return KTypeBasis(self.alg, m, provenance)

    def d_m(self, m) -> int:
        m = as_partition(self.alg, m)
        if m.weight == 0:
            return 1
        return self.ktype_basis(m).dim

    # --------------------------------------------------- spherical polynomials
    def fischer(self, p: Poly, q: Poly):
        return fischer(self.alg, p, q)

    def spherical_phi(self, m) -> Poly:
        """The K^L-invariant polynomial in P_m normalized to 1 at e."""
        m = as_partition(self.alg, m)
        self._check_cap(m)
        return self._memo(("phi", m), lambda: self._build_phi(m))

    def _build_phi(self, m: Partition) -> Poly:
        N = m.weight
        if N == 0:
            return Poly.const(self.alg.n, ONE)
        basis = self.invariant_basis(N)
        others = [n for n in partitions(N, self.alg.r) if n != m]
        # an invariant polynomial pairs with Delta_n as with its K^L-average Phi_n,
        # so Phi_m is the invariant Fischer-orthogonal to every other Delta_n
        cols = []
        for b in basis:
            col = {i: fischer(self.alg, b, self.delta_m(n)) for i, n in enumerate(others)}
            cols.append({k: v for k, v in col.items() if v != 0})
        ker = nullspace(cols)
        polys = []
        for c in ker:
            p = _combine(basis, c)
            if not p.is_zero():
                polys.append(p)
        if not polys:
            raise errors.NonUniqueInvariant(f"no invariant found in P_{m}")
        ref = polys[0]
        for p in polys[1:]:
            if _independent(ref, p):
                raise errors.NonUniqueInvariant(f"invariant space of P_{m} is not one-dimensional")
        val = ref.eval(self.alg.unit)
        if val == 0:
            raise errors.NonUniqueInvariant(f"invariant of P_{m} vanishes at e")
        return ref.scale(ONE / val)

    def spherical_phi_kernel(self, m) -> Poly:
        """Phi_m as the joint kernel of the derivation action on a K-type basis.

        Independent of :meth:`spherical_phi`; intended for small |m|.
        """
        m = as_partition(self.alg, m)
        kb = self.ktype_basis(m)
        polys = kb.basis_polys
        ders = self.alg.der_basis
        N = m.weight
        idx = MonomialIndex(self.alg.n, N)
        M = len(idx)
        cols = []
        for p in polys:
            col = {}
            for j, D in enumerate(ders):
                for k, c in idx.vector(apply_linear_field(p, D)).items():
                    col[j * M + k] = c
            cols.append(col)
        ker = nullspace(cols)
        if len(ker) != 1:
            raise errors.NonUniqueInvariant(f"derivation kernel in P_{m} has dimension {len(ker)}")
        p = _combine(polys, ker[0])
        return p.scale(ONE / p.eval(self.alg.unit))

    def phi_coefficients(self, p: Poly, N: int) -> dict:
        """Expand a K^L-invariant homogeneous polynomial of degree N in the Phi_n, |n| = N."""
        parts = partitions(N, self.alg.r)
        cols = [_poly_vec(self.spherical_phi(n)) for n in parts]
        sol = solve(cols, _poly_vec(p))
        if sol is None:
            raise errors.ExpansionFailed("polynomial is not in the span of spherical polynomials")
        return {n: c for n, c in zip(parts, sol) if c != 0}

    def binomials(self, m) -> dict:
        """Generalized binomial coefficients (m choose n) for all n."""
        m = as_partition(self.alg, m)
        self._check_cap(m)

        def build():
            shifted = self.spherical_phi(m).shift(self.alg.unit)
            out = {}
            for N, part in shifted.shells().items():
                out.update(self.phi_coefficients(part, N))
            return out

        return self._memo(("binom", m), build)

    # ----------------------------------------------------------- Laguerre
    def laguerre_poly(self, m, lam) -> Poly:
        """L_m^lam as an exact polynomial (restricted sum at discrete lam)."""
        m = as_partition(self.alg, m)
        k = check_wallach(self.alg, lam)
        d = self.alg.d
        lam_m = pochhammer(lam, m, d)
        out = Poly.zero(self.alg.n)
        if lam_m == 0:
            return out
        for n, b in self.binomials(m).items():
            if k is not None and not n.vanishes_beyond(k):
                continue
            sign = -1 if n.weight % 2 else 1
            out = out + self.spherical_phi(n).scale(b * sign / pochhammer(lam, n, d))
        return out.scale(lam_m)

    def laguerre_func_value(self, m, lam, x) -> float:
        """ell_m^lam(x) = exp(-tr x) L_m^lam(2x) at a real point x."""
        L = self.laguerre_poly(m, lam)
        xf = np.asarray(x, dtype=float)
        val = L.eval_many((2.0 * xf)[None, :])[0]
        return float(np.exp(-float(self.alg.trace(xf))) * val.real)

    # -------------------------------------------------- two-variable Phi_m
    def spherical_phi2(self, m, z, w_u, w_a):
        """Phi_m(z, u a) = Phi_m(P(a^{1/2}) u^{-1} z) for w given as (u, a).

        ``w_u`` is the coordinate matrix of u in U (None for the identity) and
        ``w_a`` a point of the closed cone.
        """
        m = as_partition(self.alg, m)
        a = np.asarray(w_a, dtype=float)
        ev = self.alg.spectral(a).eigenvalues
        if np.any(ev < -1e-12 * max(1.0, float(np.max(np.abs(ev))))):
            raise errors.NotInClosedCone("w_a is not in the closed cone")
        root = self.alg.power(a, 0.5)
        zc = np.asarray(z, dtype=complex)
        if w_u is not None:
            zc = np.linalg.solve(np.asarray(w_u, dtype=complex), zc)
        pt = self.alg.pmat(root) @ zc
        return complex(self.spherical_phi(m).eval_many(pt[None, :])[0])

    def spherical_phi2_poly(self, m, w_exact) -> Poly:
        """Phi_m(., w) as a polynomial for w = a^2 with a exact (so P(w^{1/2}) = P(a))."""
        m = as_partition(self.alg, m)
        return self.spherical_phi(m).linear_substitute(self.alg.pmat(w_exact))

    # ------------------------------------------------------ Haar cross-check
    def phi_haar_mc(self, m, x, samples: int = 4000, seed: int = 0) -> tuple[float, float]:
        """Monte Carlo average of Delta_m(kx) over K^L; returns (mean, stderr)."""
        from .quadrature import haar_KL

        m = as_partition(self.alg, m)
        ks = haar_KL(self.alg, samples, np.random.default_rng(seed))
        pts = np.einsum("sij,j->si", ks, np.asarray(x, dtype=float))
        vals = self.delta_m(m).eval_many(pts).real
        return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples))


class _ModEchelon:
    """Fully reduced echelon form of dense vectors modulo _PRIME."""

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows = np.zeros((0, ncols), dtype=np.int64)
        self.pivots: list[int] = []

    def add(self, v: np.ndarray) -> bool:
        v = v % _PRIME
        if self.pivots:
            coef = v[self.pivots]
            # chunked to keep int64 partial sums below 2^63
            for s in range(0, len(self.pivots), 1024):
                v = (v - coef[s:s + 1024] @ self.rows[s:s + 1024]) % _PRIME
        nz = np.flatnonzero(v)
        if nz.size == 0:
            return False
        piv = int(nz[0])
        v = v * pow(int(v[piv]), -1, _PRIME) % _PRIME
        if self.pivots:
            col = self.rows[:, piv].copy()
            self.rows = (self.rows - np.outer(col, v) % _PRIME) % _PRIME
        self.rows = np.vstack([self.rows, v[None, :]])
        self.pivots.append(piv)
        return True


def _poly_vec(p: Poly) -> dict:
    return {e: c for e, c in p.terms.items()}


def _combine(polys, coeffs) -> Poly:
    out = Poly.zero(polys[0].nvars)
    for p, c in zip(polys, coeffs):
        if c != 0:
            out = out + p.scale(c)
    return out


def _independent(p: Poly, q: Poly) -> bool:
    """True unless q is a scalar multiple of p."""
    if p.is_zero() or q.is_zero():
        return False
    e0 = next(iter(p.terms))
    if e0 not in q.terms:
        return True
    ratio = q.terms[e0] / p.terms[e0]
    return not (q - p.scale(ratio)).is_zero()


def fischer(alg: Algebra, p: Poly, q: Poly):
    """Fischer inner product p(d/dz) conj(q)(z) at 0, gradient taken for the trace form."""
    g = alg.gram_inv
    diag = all(g[a, b] == 0 for a in range(alg.n) for b in range(alg.n) if a != b)
    if not diag:
        p = p.linear_substitute(g)
        gd = [ONE] * alg.n
    else:
        gd = [g[a, a] for a in range(alg.n)]
    total = ZERO
    qt = q.terms
    for e, c in p.terms.items():
        qc = qt.get(e)
        if qc is None:
            continue
        f = 1
        w = ONE
        for a, k in enumerate(e):
            if k:
                f *= math.factorial(k)
                w = w * gd[a] ** k
        total = total + c * conj(qc) * f * w
    return total


# ------------------------------------------------------------------ registry

_ENGINES: dict = {}
_ENGINES_LOCK = threading.Lock()


def engine(alg: Algebra) -> PolyEngine:
    eng = _ENGINES.get(alg.name)
    if eng is None:
        with _ENGINES_LOCK:
            eng = _ENGINES.setdefault(alg.name, PolyEngine(alg))
    return eng


def delta_m(alg: Algebra, m) -> Poly:
    return engine(alg).delta_m(m)


def ktype_basis(alg: Algebra, m) -> KTypeBasis:
    return engine(alg).ktype_basis(m)


def d_m(alg: Algebra, m) -> int:
    return engine(alg).d_m(m)


def spherical_phi(alg: Algebra, m) -> Poly:
    return engine(alg).spherical_phi(m)


def spherical_phi2(alg: Algebra, m, z, w_u, w_a) -> complex:
    return engine(alg).spherical_phi2(m, z, w_u, w_a)


def binomials(alg: Algebra, m) -> dict:
    return engine(alg).binomials(m)


def laguerre_poly(alg: Algebra, m, lam) -> Poly:
    return engine(alg).laguerre_poly(m, lam)


def laguerre_func_value(alg: Algebra, m, lam, x) -> float:
    return engine(alg).laguerre_func_value(m, lam, x)


def alg_pochhammer(alg: Algebra, lam, m):
    return pochhammer(lam, as_partition(alg, m), alg.d)


def sigma_norm_sq(alg: Algebra, m):
    """||Phi_m||_Sigma^2 via the Fischer product divided by (n/r)_m."""
    m = as_partition(alg, m)
    phi = spherical_phi(alg, m)
    return fischer(alg, phi, phi) / alg_pochhammer(alg, alg.n_over_r, m)


def count_check(alg: Algebra, N: int) -> tuple[int, int]:
    """(sum of d_m over |m| = N, number of degree-N monomials)."""
    return sum(d_m(alg, m) for m in partitions(N, alg.r)), count_monomials(alg.n, N)
