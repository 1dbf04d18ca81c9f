"""Hot numeric kernels with optional numba compilation.

Set ``JFX_DISABLE_NUMBA=1`` to force the pure-numpy implementations. The
flag is read once at import; :func:`backend` reports which path is active.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("JFX_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the env flag
    HAVE_NUMBA = False


def optional_njit(*args, **kwargs):
    def decorator(func):
        if HAVE_NUMBA:
            return njit(*args, **kwargs)(func)
        return func

    return decorator


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


# ----------------------------------------------------------- polynomial eval

@optional_njit(cache=True)
def _poly_eval_loop(exps, coeffs, pts):
    npts, nv = pts.shape
    nt = exps.shape[0]
    out = np.zeros(npts, dtype=np.complex128)
    maxdeg = 0
    for t in range(nt):
        for i in range(nv):
            if exps[t, i] > maxdeg:
                maxdeg = exps[t, i]
    pw = np.empty((nv, maxdeg + 1), dtype=np.complex128)
    for p in range(npts):
        for i in range(nv):
            pw[i, 0] = 1.0
            for k in range(1, maxdeg + 1):
                pw[i, k] = pw[i, k - 1] * pts[p, i]
        acc = 0.0 + 0.0j
        for t in range(nt):
            v = coeffs[t]
            for i in range(nv):
                e = exps[t, i]
                if e:
                    v *= pw[i, e]
            acc += v
        out[p] = acc
    return out


def _poly_eval_numpy(exps, coeffs, pts):
    if exps.shape[0] == 0:
        return np.zeros(pts.shape[0], dtype=np.complex128)
    maxdeg = int(exps.max()) if exps.size else 0
    nv = pts.shape[1]
    pw = np.ones((maxdeg + 1, pts.shape[0], nv), dtype=np.complex128)
    for k in range(1, maxdeg + 1):
        pw[k] = pw[k - 1] * pts
    out = np.zeros(pts.shape[0], dtype=np.complex128)
    cols = np.arange(nv)
    for t in range(exps.shape[0]):
        out += coeffs[t] * np.prod(pw[exps[t], :, cols], axis=0)
    return out


def poly_eval_many(exps, coeffs, pts):
    if HAVE_NUMBA:
        if exps.shape[0] == 0:
            return np.zeros(pts.shape[0], dtype=np.complex128)
        return _poly_eval_loop(exps, coeffs, pts)
    return _poly_eval_numpy(exps, coeffs, pts)


# ---------------------------------------------------- compensated shell sums

@optional_njit(cache=True)
def _neumaier_loop(values):
    s_re = 0.0
    c_re = 0.0
    s_im = 0.0
    c_im = 0.0
    for k in range(values.shape[0]):
        x = values[k].real
        t = s_re + x
        if abs(s_re) >= abs(x):
            c_re += (s_re - t) + x
        else:
            c_re += (x - t) + s_re
        s_re = t
        y = values[k].imag
        t = s_im + y
        if abs(s_im) >= abs(y):
            c_im += (s_im - t) + y
        else:
            c_im += (y - t) + s_im
        s_im = t
    return complex(s_re + c_re, s_im + c_im)


def _neumaier_numpy(values):
    import math

    v = np.asarray(values, dtype=np.complex128)
    return complex(math.fsum(v.real.tolist()), math.fsum(v.imag.tolist()))


def compensated_sum(values) -> complex:
    """Sum in fixed order with error compensation (deterministic)."""
    v = np.ascontiguousarray(values, dtype=np.complex128)
    if HAVE_NUMBA:
        return _neumaier_loop(v)
    return _neumaier_numpy(v)


# ------------------------------------------------- radial J/I Bessel series

@optional_njit(cache=True)
def _radial_series_loop(a1, a2, coef, mom, tol, nconsec):
    npts = a1.shape[0]
    nmax = coef.shape[0] - 1
    out = np.zeros(npts, dtype=np.complex128)
    tails = np.zeros(npts)
    shells = np.zeros(npts, dtype=np.int64)
    pw1 = np.empty(nmax + 1, dtype=np.complex128)
    pw2 = np.empty(nmax + 1, dtype=np.complex128)
    phi = np.empty(nmax + 1, dtype=np.complex128)
    for p in range(npts):
        pw1[0] = 1.0
        pw2[0] = 1.0
        s = 0.0 + 0.0j
        comp = 0.0 + 0.0j
        small = 0
        last = 0.0
        used = 0
        for N in range(nmax + 1):
            # powers and phi_N are built lazily, only up to the shells used
            if N:
                pw1[N] = pw1[N - 1] * a1[p]
                pw2[N] = pw2[N - 1] * a2[p]
            acc = 0.0 + 0.0j
            for i in range(N + 1):
                c = mom[N, i]
                if c != 0.0:
                    acc += c * pw1[i] * pw2[N - i]
            phi[N] = acc
            shell = 0.0 + 0.0j
            for m2 in range(N // 2 + 1):
                c = coef[N, m2]
                if c != 0.0:
                    shell += c * pw1[m2] * pw2[m2] * phi[N - 2 * m2]
            t = s + shell
            # Neumaier compensation, real and imaginary parts separately
            if abs(s.real) >= abs(shell.real):
                cr = (s.real - t.real) + shell.real
            else:
                cr = (shell.real - t.real) + s.real
            if abs(s.imag) >= abs(shell.imag):
                ci = (s.imag - t.imag) + shell.imag
            else:
                ci = (shell.imag - t.imag) + s.imag
            comp += complex(cr, ci)
            s = t
            used = N + 1
            last = abs(shell)
            scale = abs(s + comp)
            if scale < 1e-300:
                scale = 1e-300
            if last <= tol * scale:
                small += 1
                if small >= nconsec:
                    break
            else:
                small = 0
        out[p] = s + comp
        tails[p] = last
        shells[p] = used
    return out, tails, shells


def _neumaier_step(s, comp, x):
    t = s + x
    cr = np.where(np.abs(s.real) >= np.abs(x.real), (s.real - t.real) + x.real, (x.real - t.real) + s.real)
    ci = np.where(np.abs(s.imag) >= np.abs(x.imag), (s.imag - t.imag) + x.imag, (x.imag - t.imag) + s.imag)
    return t, comp + (cr + 1j * ci)


def _radial_series_numpy(a1, a2, coef, mom, tol, nconsec):
    npts = a1.shape[0]
    nmax = coef.shape[0] - 1
    pw1 = np.ones((nmax + 1, npts), dtype=np.complex128)
    pw2 = np.ones((nmax + 1, npts), dtype=np.complex128)
    for N in range(1, nmax + 1):
        pw1[N] = pw1[N - 1] * a1
        pw2[N] = pw2[N - 1] * a2
    phi = np.zeros((nmax + 1, npts), dtype=np.complex128)
    s = np.zeros(npts, dtype=np.complex128)
    comp = np.zeros(npts, dtype=np.complex128)
    tails = np.zeros(npts)
    shells = np.zeros(npts, dtype=np.int64)
    small = np.zeros(npts, dtype=np.int64)
    active = np.ones(npts, dtype=bool)
    for N in range(nmax + 1):
        if not active.any():
            break
        for i in range(N + 1):
            if mom[N, i] != 0.0:
                phi[N] += mom[N, i] * pw1[i] * pw2[N - i]
        shell = np.zeros(npts, dtype=np.complex128)
        for m2 in range(N // 2 + 1):
            if coef[N, m2] != 0.0:
                shell += coef[N, m2] * pw1[m2] * pw2[m2] * phi[N - 2 * m2]
        # finished points stop accumulating
        shell = np.where(active, shell, 0.0)
        s, comp = _neumaier_step(s, comp, shell)
        last = np.abs(shell)
        tails = np.where(active, last, tails)
        shells = np.where(active, N + 1, shells)
        scale = np.maximum(np.abs(s + comp), 1e-300)
        small = np.where(last <= tol * scale, small + 1, 0)
        active &= small < nconsec
    return s + comp, tails, shells


def radial_series(a1, a2, coef, mom, tol, nconsec=2):
    """Sum shells N of sum_{m2} coef[N, m2] (a1 a2)^m2 phi_{N - 2 m2}(a1, a2) per point.

    phi_j(a1, a2) = sum_i mom[j, i] a1^i a2^(j-i). Returns (values, last-shell
    magnitudes, shells used); summation stops after ``nconsec`` consecutive
    shells below ``tol`` relative to the running sum.
    """
    a1 = np.ascontiguousarray(a1, dtype=np.complex128).reshape(-1)
    a2 = np.ascontiguousarray(a2, dtype=np.complex128).reshape(-1)
    coef = np.ascontiguousarray(coef, dtype=np.float64)
    mom = np.ascontiguousarray(mom, dtype=np.float64)
    if HAVE_NUMBA:
        return _radial_series_loop(a1, a2, coef, mom, float(tol), int(nconsec))
    return _radial_series_numpy(a1, a2, coef, mom, float(tol), int(nconsec))
