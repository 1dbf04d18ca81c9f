"""Orbit measures d mu_lambda, d nu_lambda, the cone Gamma function and Haar samplers.

Radial integrals use the trapezoid rule in logarithmic eigenvalue coordinates
t_i = log b_i. Ordered tuples t_1 > ... > t_k are parametrized by the smallest
coordinate and the logarithms of the gaps, so every coordinate runs over an
interval on which the integrand decays exponentially at both ends.
"""

from __future__ import annotations

import json
import math
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import special
from scipy.stats import special_ortho_group, unitary_group

from . import errors
from .jordan import Algebra
from .polyengine import check_wallach


# ------------------------------------------------------------ Gamma_Omega

def gamma_omega_rd(r: int, d: int, lam) -> float:
    """(2 pi)^{(n-r)/2} prod_j Gamma(lambda - (j-1) d/2) for rank r, multiplicity d."""
    lam = float(lam)
    n = r + r * (r - 1) * d // 2
    out = (2 * math.pi) ** ((n - r) / 2)
    for j in range(r):
        arg = lam - j * d / 2
        if arg <= 0 and float(arg).is_integer():
            raise errors.PoleAtLambda(f"Gamma pole at argument {arg}")
        out *= special.gamma(arg)
    return float(out)


def gamma_omega(alg: Algebra, lam) -> float:
    return gamma_omega_rd(alg.r, alg.d, lam)


def c_lambda(alg: Algebra, lam) -> float:
    """Fock normalization 2^{3 r lambda} Gamma_Omega(n/r)."""
    return 2.0 ** (3 * alg.r * float(lam)) * gamma_omega(alg, alg.n / alg.r)


def lebesgue_radial_constant(alg: Algebra) -> float:
    """c with int_Omega f dx = c int_{a_1 > ... > a_r > 0} f(a) prod_{i<j} (a_i - a_j)^d da.

    Follows from the product formula for Gamma_Omega and the Laguerre form of
    Selberg's integral.
    """
    r, d, n = alg.r, alg.d, alg.n
    denom = 1.0
    for j in range(r):
        denom *= special.gamma(1 + (j + 1) * d / 2) / special.gamma(1 + d / 2)
    return math.factorial(r) * (2 * math.pi) ** ((n - r) / 2) / denom


# ----------------------------------------------------------- radial rules

@dataclass(frozen=True)
class RadialRule:
    """Nodes t[P, k] (descending per row) and weights w[P] carrying J_lambda(t) dt."""

    t: np.ndarray
    w: np.ndarray
    step: float
    t_lo: float
    t_hi: float

    @property
    def size(self) -> int:
        return int(self.w.shape[0])

    @property
    def eigen(self) -> np.ndarray:
        return np.exp(self.t)


def _orbit_k(alg: Algebra, lam) -> int:
    k = check_wallach(alg, lam)
    return alg.r if k is None else k


def density_rates(alg: Algebra, lam) -> tuple[float, float]:
    """Exponential rates of J_lambda as all t_i -> -inf together, and as t_k -> -inf alone."""
    k = _orbit_k(alg, lam)
    lamf = float(lam)
    together = alg.r * lamf
    alone = alg.r * lamf / k - (k - 1) * alg.d / 2 if k else together
    return together, alone


def radial_rule(alg: Algebra, lam, step: float | None = None, t_lo: float | None = None,
                t_hi: float = 4.5, h_lo: float | None = None) -> RadialRule:
    """Trapezoid rule for int_{t_1 > ... > t_k} F(t) J_lambda(t) dt.

    t_k runs over [t_lo, t_hi]; gaps t_i - t_{i+1} = exp(h_i) with h_i over
    [h_lo, log(t_hi - t_lo)]. Outside these windows J_lambda F is assumed
    negligible; defaults suit integrands decaying like exp(-c tr x).
    """
    k = _orbit_k(alg, lam)
    lamf = float(lam)
    d = alg.d
    if k == 0:
        return RadialRule(np.zeros((1, 0)), np.ones(1), step or 0.0, 0.0, 0.0)
    together, alone = density_rates(alg, lam)
    if t_lo is None:
        t_lo = -34.0 / min(together, alone)
    if step is None:
        # the density peak sharpens like (r lambda)^{-1/2}
        step = 0.25 / max(1.0, math.sqrt(alg.r * lamf / 6.0))
    base = np.arange(t_lo, t_hi + step / 2, step)
    if k == 1:
        t = base[:, None]
        w = step * np.exp(alg.r * lamf * base)
        return RadialRule(t, w, step, t_lo, t_hi)
    if k >= 3:
        # coarser default: higher-rank rules only feed calibrated integrals
        step = max(step, 0.5)
        base = np.arange(t_lo, t_hi + step / 2, step)
    if h_lo is None:
        h_lo = (-36.0 if k == 2 else -20.0) / (d + 1)
    h_hi = math.log(t_hi - t_lo)
    hs = np.arange(h_lo, h_hi + step / 2, step)
    grids = np.meshgrid(base, *([hs] * (k - 1)), indexing="ij")
    tk = grids[0].ravel()
    gaps = [np.exp(g.ravel()) for g in grids[1:]]
    cols = [tk]
    for g in reversed(gaps):
        cols.append(cols[-1] + g)
    t = np.stack(cols[::-1], axis=1)
    keep = t[:, 0] <= t_hi + 1e-12
    t = t[keep]
    logw = (alg.r * lamf / k) * t.sum(axis=1)
    for g in gaps:
        logw += np.log(g[keep])
    for i in range(k):
        for j in range(i + 1, k):
            logw += d * np.log(np.sinh((t[:, i] - t[:, j]) / 2))
    w = np.exp(logw) * step ** k
    return RadialRule(t, w, step, t_lo, t_hi)


# -------------------------------------------------------- K^L group rules

def _sphere_rule(dim: int, npts: int) -> tuple[np.ndarray, np.ndarray]:
    """Product rule on S^dim in R^{dim+1}; weights sum to one."""
    if dim == 0:
        return np.array([[1.0], [-1.0]]), np.array([0.5, 0.5])
    if dim == 1:
        phi = 2 * math.pi * (np.arange(npts) + 0.5) / npts
        return np.stack([np.cos(phi), np.sin(phi)], axis=1), np.full(npts, 1.0 / npts)
    a = (dim - 2) / 2
    x, wx = special.roots_jacobi(npts, a, a)
    wx = wx / wx.sum()
    sub, wsub = _sphere_rule(dim - 1, npts)
    s = np.sqrt(1 - x * x)
    pts = np.concatenate([x[:, None, None].repeat(sub.shape[0], 1),
                          s[:, None, None] * sub[None, :, :]], axis=2)
    return pts.reshape(-1, dim + 1), (wx[:, None] * wsub[None, :]).ravel()


def _spatial_basis(alg: Algebra) -> np.ndarray:
    """Orthonormal-style spatial vectors f_i with f_i o f_j = delta_ij e (rank-2 algebras)."""
    if alg.r != 2:
        raise errors.UnsupportedGroup("spatial frame only for rank-2 algebras")
    if alg.kind == "spin":
        return np.eye(alg.n)[1:]
    c1, c2 = (np.asarray(c, dtype=float) for c in alg.frame)
    f1 = c1 - c2
    rest = []
    # the Peirce 1/2-space of c1 is spanned by the off-diagonal basis vectors
    for a in range(alg.n):
        v = np.zeros(alg.n)
        v[a] = 1.0
        if abs(alg.inner(np.asarray(v), f1)) < 1e-12 and abs(alg.trace(v)) < 1e-12:
            sq = alg.mul(v, v)
            v = v / math.sqrt(float(alg.trace(sq)) / 2)
            rest.append(v)
    return np.stack([f1] + rest)


def _zonal_rule(dim: int, npts: int) -> tuple[np.ndarray, np.ndarray]:
    """First coordinate of the uniform measure on S^dim, as a 1-D rule."""
    if dim == 0:
        return np.array([1.0, -1.0]), np.array([0.5, 0.5])
    a = (dim - 2) / 2
    x, wx = special.roots_jacobi(npts, a, a)
    return x, wx / wx.sum()


def idempotent_rule(alg: Algebra, npts: int = 16, zonal: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Rank-one idempotents k c_1 (k Haar on K^L) with weights, rank-2 algebras."""
    f = _spatial_basis(alg)
    if zonal:
        x, w = _zonal_rule(f.shape[0] - 1, npts)
        e = np.asarray(alg.unit, dtype=float)
        # any unit completion works; it keeps k c_1 an idempotent
        perp = np.sqrt(np.clip(1 - x * x, 0.0, None))
        return 0.5 * (e[None, :] + x[:, None] * f[0][None, :] + perp[:, None] * f[1][None, :]), w
    om, w = _sphere_rule(f.shape[0] - 1, npts)
    e = np.asarray(alg.unit, dtype=float)
    return 0.5 * (e[None, :] + om @ f), w


# -------------------------------------------------------------- samplers

def _quaternion_so3(rng: np.random.Generator, count: int) -> np.ndarray:
    q = rng.standard_normal((count, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    w, x, y, z = q.T
    return np.stack([
        np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)], -1),
        np.stack([2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)], -1),
        np.stack([2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)], -1),
    ], axis=1)


def _orthogonal(rng: np.random.Generator, dim: int, count: int) -> np.ndarray:
    if dim == 1:
        return np.ones((count, 1, 1))
    if dim == 2:
        th = rng.uniform(0, 2 * math.pi, count)
        c, s = np.cos(th), np.sin(th)
        return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], axis=1)
    if dim == 3:
        return _quaternion_so3(rng, count)
    return special_ortho_group.rvs(dim, size=count, random_state=rng).reshape(count, dim, dim)


def _unitary(rng: np.random.Generator, dim: int, count: int) -> np.ndarray:
    if dim == 1:
        th = rng.uniform(0, 2 * math.pi, count)
        return np.exp(1j * th).reshape(count, 1, 1)
    return unitary_group.rvs(dim, size=count, random_state=rng).reshape(count, dim, dim)


def _matrix_tools(alg: Algebra):
    """Basis matrices B[a] and the linear map R with coords = R @ vec(M)."""
    B = np.array([np.asarray(alg.matrix_of(np.eye(alg.n)[a]), dtype=complex) for a in range(alg.n)])
    flat = B.reshape(alg.n, -1).T
    R = np.linalg.pinv(flat)
    return B, R


def _action_matrices(alg: Algebra, g: np.ndarray, h: np.ndarray | None = None) -> np.ndarray:
    """Coordinate matrices of X -> g X h^T for a batch of g (h defaults to g)."""
    B, R = _matrix_tools(alg)
    h = g if h is None else h
    moved = np.einsum("sij,ajk,slk->sail", g, B, h)
    cols = np.einsum("pq,saq->spa", R, moved.reshape(moved.shape[0], alg.n, -1))
    return cols


def haar_KL(alg: Algebra, count: int, rng: np.random.Generator | int | None = None) -> np.ndarray:
    """Haar samples of K^L as real coordinate matrices [count, n, n]."""
    rng = np.random.default_rng(rng)
    n = alg.n
    if alg.kind == "real":
        return np.ones((count, 1, 1))
    if alg.kind == "spin":
        out = np.zeros((count, n, n))
        out[:, 0, 0] = 1.0
        out[:, 1:, 1:] = _orthogonal(rng, n - 1, count)
        return out
    if alg.kind == "sym":
        g = _orthogonal(rng, alg.r, count).astype(complex)
        return _action_matrices(alg, g).real
    if alg.kind == "herm":
        g = _unitary(rng, alg.r, count)
        return _action_matrices(alg, g, g.conj()).real
    raise errors.UnsupportedGroup(f"no K^L sampler for {alg.name}")


def haar_U(alg: Algebra, count: int, rng: np.random.Generator | int | None = None) -> np.ndarray:
    """Haar samples of U acting on V_C as complex coordinate matrices [count, n, n]."""
    rng = np.random.default_rng(rng)
    n = alg.n
    if alg.kind == "real":
        return _unitary(rng, 1, count)
    if alg.kind == "spin":
        phase = np.exp(1j * rng.uniform(0, 2 * math.pi, count))
        m = _orthogonal(rng, n, count)
        D = np.diag([1.0] + [1j] * (n - 1))
        Dinv = np.diag([1.0] + [-1j] * (n - 1))
        return phase[:, None, None] * np.einsum("ij,sjk,kl->sil", D, m, Dinv)
    if alg.kind == "sym":
        g = _unitary(rng, alg.r, count)
        return _action_matrices(alg, g)
    if alg.kind == "herm":
        g = _unitary(rng, alg.r, count)
        h = _unitary(rng, alg.r, count)
        return _action_matrices(alg, g, h.conj())
    raise errors.UnsupportedGroup(f"no U sampler for {alg.name}")


# ------------------------------------------------------------ calibration

_CACHE_LOCK = threading.Lock()
_MEMORY_CACHE: dict = {}


def _cache_path() -> Path | None:
    root = os.environ.get("JFX_CACHE_DIR")
    return Path(root) / "calibration.json" if root else None


def _cache_load() -> dict:
    path = _cache_path()
    if path is None or not path.exists():
        return {}
    try:
        return json.loads(path.read_text())
    except (OSError, ValueError):
        return {}


def _cache_store(key: str, entry: dict) -> None:
    path = _cache_path()
    if path is None:
        return
    data = _cache_load()
    data[key] = entry
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(data, indent=1, sort_keys=True))
    tmp.replace(path)


# ---------------------------------------------------------- orbit measure

@dataclass
class OrbitMeasure:
    """d mu_lambda on O_lambda via its radial formula; constant fixed by int e^{-2 tr} = 1."""

    alg: Algebra
    lam: object
    step: float | None = None
    t_lo: float | None = None
    t_hi: float = 4.5
    group_points: int = 16
    rule: RadialRule = field(init=False)
    constant: float | None = field(init=False, default=None)

    def __post_init__(self):
        self.k = _orbit_k(self.alg, self.lam)
        self.rule = radial_rule(self.alg, self.lam, self.step, self.t_lo, self.t_hi)

    @property
    def key(self) -> str:
        return f"{self.alg.name}|{self.lam}|{self.rule.step:.6g}|{self.rule.t_lo:.6g}|{self.t_hi}"

    def calibrate(self, use_cache: bool = True) -> float:
        key = self.key
        if use_cache:
            with _CACHE_LOCK:
                hit = _MEMORY_CACHE.get(key) or _cache_load().get(key)
            if hit is not None:
                self.constant = float(hit["constant"])
                return self.constant
        raw = self.integrate_radial_raw(lambda b: np.exp(-2 * b.sum(axis=1)))
        self.constant = 1.0 / raw
        entry = {"algebra": self.alg.name, "lambda": str(self.lam), "constant": self.constant,
                 "rule_size": self.rule.size, "step": self.rule.step, "seed": None}
        with _CACHE_LOCK:
            _MEMORY_CACHE[key] = entry
            _cache_store(key, entry)
        return self.constant

    def analytic_constant(self) -> float | None:
        """The radial constant implied by the Riesz density (continuous lambda only)."""
        if self.k != self.alg.r:
            return None
        lamf = float(self.lam)
        alg = self.alg
        spread = 2.0 ** (alg.d * alg.r * (alg.r - 1) / 2)
        return 2.0 ** (alg.r * lamf) / gamma_omega(alg, lamf) * lebesgue_radial_constant(alg) * spread

    def _const(self) -> float:
        if self.constant is None:
            raise errors.RuleNotCalibrated("call calibrate() first")
        return self.constant

    def integrate_radial_raw(self, F) -> float:
        b = self.rule.eigen
        vals = np.asarray(F(b))
        return float(np.dot(self.rule.w, vals))

    def integrate_radial(self, F) -> float:
        """int f d mu for K^L-invariant f given as F(eigenvalues[P, k])."""
        return self._const() * self.integrate_radial_raw(F)

    def points(self, b: np.ndarray) -> np.ndarray:
        """sum_i b_i c_i as coordinate vectors."""
        frame = np.array([np.asarray(c, dtype=float) for c in self.alg.frame[: self.k]])
        if self.k == 0:
            return np.zeros((b.shape[0], self.alg.n))
        return b @ frame

    def integrate(self, f, invariant: bool = False, zonal: bool = False, samples: int = 2000,
                  seed: int = 0, complex_values: bool = False):
        """int f d mu for f evaluated on coordinate arrays [P, n].

        On rank-2 algebras the K^L average runs over rank-one idempotents k c_1
        with a product rule on the sphere. ``zonal`` declares that f(k x) sees
        k c_1 only through its component along c_1 - c_2 (true when every other
        point entering f lies in the span of the frame); the sphere rule then
        collapses to one dimension. With ``complex_values`` the imaginary part
        is kept.
        """
        def wdot(vals):
            v = np.dot(self.rule.w, np.asarray(vals))
            return complex(v) if complex_values else float(np.real(v))

        const = self._const()
        b = self.rule.eigen
        if invariant or self.alg.r == 1 or self.k == 0:
            return const * wdot(f(self.points(b)))
        if self.k > 2:
            raise errors.UnsupportedGroup("non-invariant integrands need orbit rank <= 2")
        if self.alg.r == 2:
            idem, gw = idempotent_rule(self.alg, self.group_points, zonal=zonal)
            e = np.asarray(self.alg.unit, dtype=float)
            total = 0.0
            for c, wc in zip(idem, gw):
                other = e - c
                x = b[:, :1] * c[None, :] + (b[:, 1:2] * other[None, :] if self.k == 2 else 0.0)
                total += wc * wdot(f(x))
            return const * total
        ks = haar_KL(self.alg, samples, seed)
        x0 = self.points(b)
        acc = 0.0
        for kmat in ks:
            acc += wdot(f(x0 @ kmat.T))
        return const * acc / samples


def orbit_measure(alg: Algebra, lam, **kwargs) -> OrbitMeasure:
    m = OrbitMeasure(alg, lam, **kwargs)
    m.calibrate()
    return m


def integrate_mu(alg: Algebra, lam, f, is_invariant: bool = False, **kwargs) -> float:
    """Convenience wrapper: calibrate and integrate f (on coordinate arrays)."""
    return orbit_measure(alg, lam, **kwargs).integrate(f, invariant=is_invariant)


# -------------------------------------------------- complexified orbit X_lambda

@dataclass(frozen=True)
class MCResult:
    value: float
    stderr: float
    samples: int


@dataclass
class ComplexOrbitMeasure:
    """d nu_lambda = int_U int_{O_lambda} f(u x^{1/2}) d mu_lambda(x) du, Monte Carlo over U.

    Each sample pairs a Haar draw u with a radial node drawn with probability
    proportional to its (nonnegative) quadrature weight, so the estimator is a
    mean of iid terms and its standard error is the usual one.
    """

    alg: Algebra
    lam: object
    step: float | None = 0.4
    t_lo: float | None = None
    t_hi: float = 8.0
    chunk: int = 20000

    def __post_init__(self):
        if self.t_lo is None and _orbit_k(self.alg, self.lam):
            # omega_lambda is only resolved down to e^-16 per unit rate; the
            # dropped mass is below e^-16 relative
            self.t_lo = -16.0 / min(min(density_rates(self.alg, self.lam)), 1.0)
        self.mu = orbit_measure(self.alg, self.lam, step=self.step, t_lo=self.t_lo, t_hi=self.t_hi)
        self.c_lambda = c_lambda(self.alg, self.lam)

    def radial_nodes(self, radial_weight=None) -> tuple[np.ndarray, np.ndarray]:
        """Points x^{1/2} on the frame and their weights (constant included)."""
        mu = self.mu
        roots = np.sqrt(mu.rule.eigen)
        wts = mu.rule.w * mu._const()
        if radial_weight is not None:
            wts = wts * np.asarray(radial_weight(roots), dtype=float)
        if np.any(wts < 0):
            raise ValueError("radial weights must be nonnegative")
        return mu.points(roots), wts

    def integrate(self, f, samples: int, seed: int, radial_weight=None, nodes=None) -> MCResult:
        """Estimate int f d nu with f evaluated on complex coordinate arrays [P, n]."""
        base, wts = self.radial_nodes(radial_weight) if nodes is None else nodes
        total = float(wts.sum())
        prob = wts / total
        rng = np.random.default_rng(seed)
        vals = np.empty(samples)
        done = 0
        while done < samples:
            m = min(self.chunk, samples - done)
            us = haar_U(self.alg, m, rng)
            idx = rng.choice(prob.shape[0], size=m, p=prob)
            pts = np.einsum("sij,sj->si", us, base[idx].astype(complex))
            vals[done:done + m] = total * np.asarray(f(pts)).real
            done += m
        mean = float(vals.mean())
        se = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else float("inf")
        return MCResult(mean, se, samples)


def integrate_nu(alg: Algebra, lam, f, samples: int, seed: int, radial_weight=None, **kwargs) -> MCResult:
    return ComplexOrbitMeasure(alg, lam, **kwargs).integrate(f, samples, seed, radial_weight)
