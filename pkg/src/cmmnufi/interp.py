"""Periodic barycentric-Lagrange and cubic B-spline interpolation on uniform grids.

Coefficients are stored wrap-padded so the compiled kernels never take a modulo
inside the stencil loop.  The point kernels (``basis``, ``eval1d_point``,
``eval2d_pair``) are reused by the characteristic tracer and the map composer.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numba
import numpy as np

from .phasegrid import PhaseGrid

LAGRANGE = 0
SPLINE = 1
MAX_STENCIL = 16


@dataclass(frozen=True)
class Scheme:
    kind: str
    order: int = 3

    def __post_init__(self):
        if self.kind not in ("lagrange", "cubic_spline"):
            raise ValueError(f"unknown interpolation kind {self.kind!r}")
        if self.kind == "cubic_spline" and self.order != 3:
            raise ValueError("only cubic splines are supported")
        if not 1 <= self.order < MAX_STENCIL:
            raise ValueError(f"interpolation order must be in [1, {MAX_STENCIL - 1}], got {self.order}")

    @classmethod
    def parse(cls, text: str) -> "Scheme":
        s = text.strip().lower()
        if s in ("cubic_spline", "spline", "spline3"):
            return cls("cubic_spline", 3)
        if s == "linear":
            return cls("lagrange", 1)
        m = re.fullmatch(r"lagrange(\d+)", s)
        if m:
            return cls("lagrange", int(m.group(1)))
        raise ValueError(f"unknown interpolation scheme {text!r} (use cubic_spline, linear or lagrange<m>)")

    def __str__(self):
        return "cubic_spline" if self.kind == "cubic_spline" else f"lagrange{self.order}"

    @property
    def code(self) -> int:
        return SPLINE if self.kind == "cubic_spline" else LAGRANGE

    @property
    def npts(self) -> int:
        return 4 if self.kind == "cubic_spline" else self.order + 1

    @property
    def pad(self) -> int:
        return self.order // 2 + 1

    @property
    def weights(self) -> np.ndarray:
        return barycentric_weights(self.order)


CUBIC_SPLINE = Scheme("cubic_spline")
LAGRANGE3 = Scheme("lagrange", 3)
LINEAR = Scheme("lagrange", 1)


def barycentric_weights(m: int) -> np.ndarray:
    """Barycentric weights of m+1 equispaced nodes (common factors dropped)."""
    return np.array([(-1) ** j * math.comb(m, j) for j in range(m + 1)], dtype=float)


# --------------------------------------------------------------------------- kernels


@numba.njit(cache=True, inline="always")
def wrap(u, n):
    if 0.0 <= u < n:
        return u
    u = u - n * math.floor(u / n)
    if u >= n:
        u -= n
    return u


@numba.njit(cache=True, inline="always")
def weights4(u, code):
    """Stencil start and the four weights of the cubic spline or cubic Lagrange basis."""
    i = math.floor(u)
    t = u - i
    if code == SPLINE:
        s = 1.0 - t
        t2 = t * t
        t3 = t2 * t
        return (int(i) - 1, s * s * s / 6.0, (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0,
                (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0, t3 / 6.0)
    # cubic Lagrange on nodes -1..2 about floor(u), written out to avoid divisions
    tp = t + 1.0
    tm = t - 1.0
    tm2 = t - 2.0
    return (int(i) - 1, -t * tm * tm2 / 6.0, tp * tm * tm2 * 0.5, -tp * t * tm2 * 0.5, tp * t * tm / 6.0)


@numba.njit(cache=True, inline="always")
def basis(u, code, m, bw, w):
    """Fill ``w`` with stencil weights at grid coordinate ``u``; return stencil start."""
    if code == SPLINE or m == 3:
        k, w[0], w[1], w[2], w[3] = weights4(u, code)
        return k
    if m % 2 == 1:
        start = int(math.floor(u)) - (m - 1) // 2
    else:
        start = int(math.floor(u + 0.5)) - m // 2
    t = u - start
    for j in range(m + 1):
        if t == j:
            for l in range(m + 1):
                w[l] = 0.0
            w[j] = 1.0
            return start
    total = 0.0
    for j in range(m + 1):
        w[j] = bw[j] / (t - j)
        total += w[j]
    for j in range(m + 1):
        w[j] /= total
    return start


@numba.njit(cache=True, inline="always")
def eval1d_point(cpad, pad, n, u, code, m, bw, w):
    u = wrap(u, n)
    if code == SPLINE or m == 3:
        k, w0, w1, w2, w3 = weights4(u, code)
        k += pad
        return w0 * cpad[k] + w1 * cpad[k + 1] + w2 * cpad[k + 2] + w3 * cpad[k + 3]
    k = basis(u, code, m, bw, w) + pad
    npts = 4 if code == SPLINE else m + 1
    s = 0.0
    for j in range(npts):
        s += w[j] * cpad[k + j]
    return s


@numba.njit(cache=True, inline="always")
def eval1d_row(cpad, row, pad, n, u, code, m, bw, w):
    """Like ``eval1d_point`` on row ``row`` of a stack of padded 1D coefficient arrays."""
    u = wrap(u, n)
    if code == SPLINE or m == 3:
        k, w0, w1, w2, w3 = weights4(u, code)
        k += pad
        return w0 * cpad[row, k] + w1 * cpad[row, k + 1] + w2 * cpad[row, k + 2] + w3 * cpad[row, k + 3]
    k = basis(u, code, m, bw, w) + pad
    npts = 4 if code == SPLINE else m + 1
    s = 0.0
    for j in range(npts):
        s += w[j] * cpad[row, k + j]
    return s


@numba.njit(cache=True, inline="always")
def eval2d_pair(ca, cb, s, pad, n1, n2, u1, u2, code, m, bw, w1, w2):
    """Evaluate slab ``s`` of two stacks of padded 2D coefficient arrays with one shared stencil."""
    u1 = wrap(u1, n1)
    u2 = wrap(u2, n2)
    if code == SPLINE or m == 3:
        k1, a0, a1, a2, a3 = weights4(u1, code)
        k2, b0, b1, b2, b3 = weights4(u2, code)
        k1 += pad
        k2 += pad
        r0 = k1
        r1 = k1 + 1
        r2 = k1 + 2
        r3 = k1 + 3
        sa = (a0 * (b0 * ca[s, r0, k2] + b1 * ca[s, r0, k2 + 1] + b2 * ca[s, r0, k2 + 2] + b3 * ca[s, r0, k2 + 3])
              + a1 * (b0 * ca[s, r1, k2] + b1 * ca[s, r1, k2 + 1] + b2 * ca[s, r1, k2 + 2] + b3 * ca[s, r1, k2 + 3])
              + a2 * (b0 * ca[s, r2, k2] + b1 * ca[s, r2, k2 + 1] + b2 * ca[s, r2, k2 + 2] + b3 * ca[s, r2, k2 + 3])
              + a3 * (b0 * ca[s, r3, k2] + b1 * ca[s, r3, k2 + 1] + b2 * ca[s, r3, k2 + 2] + b3 * ca[s, r3, k2 + 3]))
        sb = (a0 * (b0 * cb[s, r0, k2] + b1 * cb[s, r0, k2 + 1] + b2 * cb[s, r0, k2 + 2] + b3 * cb[s, r0, k2 + 3])
              + a1 * (b0 * cb[s, r1, k2] + b1 * cb[s, r1, k2 + 1] + b2 * cb[s, r1, k2 + 2] + b3 * cb[s, r1, k2 + 3])
              + a2 * (b0 * cb[s, r2, k2] + b1 * cb[s, r2, k2 + 1] + b2 * cb[s, r2, k2 + 2] + b3 * cb[s, r2, k2 + 3])
              + a3 * (b0 * cb[s, r3, k2] + b1 * cb[s, r3, k2 + 1] + b2 * cb[s, r3, k2 + 2] + b3 * cb[s, r3, k2 + 3]))
        return sa, sb
    k1 = basis(u1, code, m, bw, w1) + pad
    k2 = basis(u2, code, m, bw, w2) + pad
    npts = m + 1
    sa = 0.0
    sb = 0.0
    for a in range(npts):
        ra = 0.0
        rb = 0.0
        for b in range(npts):
            ra += w2[b] * ca[s, k1 + a, k2 + b]
            rb += w2[b] * cb[s, k1 + a, k2 + b]
        sa += w1[a] * ra
        sb += w1[a] * rb
    return sa, sb


@numba.njit(cache=True, inline="always")
def eval2d_one(c, pad, n1, n2, u1, u2, code, m, bw, w1, w2):
    """Evaluate one padded 2D coefficient array."""
    u1 = wrap(u1, n1)
    u2 = wrap(u2, n2)
    if code == SPLINE or m == 3:
        k1, a0, a1, a2, a3 = weights4(u1, code)
        k2, b0, b1, b2, b3 = weights4(u2, code)
        k1 += pad
        k2 += pad
        return (a0 * (b0 * c[k1, k2] + b1 * c[k1, k2 + 1] + b2 * c[k1, k2 + 2] + b3 * c[k1, k2 + 3])
                + a1 * (b0 * c[k1 + 1, k2] + b1 * c[k1 + 1, k2 + 1] + b2 * c[k1 + 1, k2 + 2] + b3 * c[k1 + 1, k2 + 3])
                + a2 * (b0 * c[k1 + 2, k2] + b1 * c[k1 + 2, k2 + 1] + b2 * c[k1 + 2, k2 + 2] + b3 * c[k1 + 2, k2 + 3])
                + a3 * (b0 * c[k1 + 3, k2] + b1 * c[k1 + 3, k2 + 1] + b2 * c[k1 + 3, k2 + 2] + b3 * c[k1 + 3, k2 + 3]))
    if m == 1:
        i1 = math.floor(u1)
        i2 = math.floor(u2)
        t1 = u1 - i1
        t2 = u2 - i2
        k1 = int(i1) + pad
        k2 = int(i2) + pad
        return ((1.0 - t1) * ((1.0 - t2) * c[k1, k2] + t2 * c[k1, k2 + 1])
                + t1 * ((1.0 - t2) * c[k1 + 1, k2] + t2 * c[k1 + 1, k2 + 1]))
    k1 = basis(u1, code, m, bw, w1) + pad
    k2 = basis(u2, code, m, bw, w2) + pad
    s = 0.0
    for a in range(m + 1):
        r = 0.0
        for b in range(m + 1):
            r += w2[b] * c[k1 + a, k2 + b]
        s += w1[a] * r
    return s


@numba.njit(cache=True, inline="always")
def _eval2d_one_loop(c, pad, n1, n2, o1, o2, ih1, ih2, xs, vs, code, m, bw, out, w1, w2):
    for p in range(xs.size):
        out[p] = eval2d_one(c, pad, n1, n2, (xs[p] - o1) * ih1, (vs[p] - o2) * ih2, code, m, bw, w1, w2)


@numba.njit(cache=True)
def _eval2d_one_many(c, pad, n1, n2, o1, o2, ih1, ih2, xs, vs, code, m, bw, out):
    w1 = np.empty(MAX_STENCIL)
    w2 = np.empty(MAX_STENCIL)
    if code == SPLINE:
        _eval2d_one_loop(c, pad, n1, n2, o1, o2, ih1, ih2, xs, vs, SPLINE, 3, bw, out, w1, w2)
    elif m == 3:
        _eval2d_one_loop(c, pad, n1, n2, o1, o2, ih1, ih2, xs, vs, LAGRANGE, 3, bw, out, w1, w2)
    elif m == 1:
        _eval2d_one_loop(c, pad, n1, n2, o1, o2, ih1, ih2, xs, vs, LAGRANGE, 1, bw, out, w1, w2)
    else:
        _eval2d_one_loop(c, pad, n1, n2, o1, o2, ih1, ih2, xs, vs, code, m, bw, out, w1, w2)


@numba.njit(cache=True, inline="always")
def _eval1d_loop(cpad, pad, n, origin, inv_h, xs, code, m, bw, out, w):
    for p in range(xs.size):
        out[p] = eval1d_point(cpad, pad, n, (xs[p] - origin) * inv_h, code, m, bw, w)


@numba.njit(cache=True)
def _eval1d_many(cpad, pad, n, origin, inv_h, xs, code, m, bw, out):
    w = np.empty(MAX_STENCIL)
    # literal scheme arguments let the compiler specialise the 4-point stencils
    if code == SPLINE:
        _eval1d_loop(cpad, pad, n, origin, inv_h, xs, SPLINE, 3, bw, out, w)
    elif m == 3:
        _eval1d_loop(cpad, pad, n, origin, inv_h, xs, LAGRANGE, 3, bw, out, w)
    else:
        _eval1d_loop(cpad, pad, n, origin, inv_h, xs, code, m, bw, out, w)


@numba.njit(cache=True, inline="always")
def _eval2d_loop(ca, cb, pad, n1, n2, o1, o2, ih1, ih2, xs, vs, code, m, bw, outa, outb, w1, w2):
    for p in range(xs.size):
        a, b = eval2d_pair(ca, cb, 0, pad, n1, n2, (xs[p] - o1) * ih1, (vs[p] - o2) * ih2, code, m, bw, w1, w2)
        outa[p] = a
        outb[p] = b


@numba.njit(cache=True)
def _eval2d_many(ca, cb, pad, n1, n2, o1, o2, ih1, ih2, xs, vs, code, m, bw, outa, outb):
    w1 = np.empty(MAX_STENCIL)
    w2 = np.empty(MAX_STENCIL)
    if code == SPLINE:
        _eval2d_loop(ca, cb, pad, n1, n2, o1, o2, ih1, ih2, xs, vs, SPLINE, 3, bw, outa, outb, w1, w2)
    elif m == 3:
        _eval2d_loop(ca, cb, pad, n1, n2, o1, o2, ih1, ih2, xs, vs, LAGRANGE, 3, bw, outa, outb, w1, w2)
    else:
        _eval2d_loop(ca, cb, pad, n1, n2, o1, o2, ih1, ih2, xs, vs, code, m, bw, outa, outb, w1, w2)


@numba.njit(cache=True)
def _cyclic_spline_solve(y):
    """Solve (c[i-1] + 4 c[i] + c[i+1]) / 6 = y[i] (cyclic) along axis 0 of a 2D array.

    Sherman-Morrison correction on top of a Thomas sweep.
    """
    n, ncol = y.shape
    a = 1.0 / 6.0
    b = 4.0 / 6.0
    gamma = -b
    diag = np.full(n, b)
    diag[0] = b - gamma
    diag[n - 1] = b - a * a / gamma
    # forward elimination factors (shared by both right-hand sides)
    cp = np.empty(n)
    dd = np.empty(n)
    dd[0] = diag[0]
    cp[0] = a / dd[0]
    for i in range(1, n):
        dd[i] = diag[i] - a * cp[i - 1]
        cp[i] = a / dd[i]
    u = np.zeros(n)
    u[0] = gamma
    u[n - 1] = a
    z = np.empty(n)
    z[0] = u[0] / dd[0]
    for i in range(1, n):
        z[i] = (u[i] - a * z[i - 1]) / dd[i]
    for i in range(n - 2, -1, -1):
        z[i] -= cp[i] * z[i + 1]
    vz = z[0] + (a / gamma) * z[n - 1]
    out = np.empty_like(y)
    col = np.empty(n)
    for j in range(ncol):
        col[0] = y[0, j] / dd[0]
        for i in range(1, n):
            col[i] = (y[i, j] - a * col[i - 1]) / dd[i]
        for i in range(n - 2, -1, -1):
            col[i] -= cp[i] * col[i + 1]
        fac = (col[0] + (a / gamma) * col[n - 1]) / (1.0 + vz)
        for i in range(n):
            out[i, j] = col[i] - fac * z[i]
    return out


# --------------------------------------------------------------------------- builders


def _check_values(values: np.ndarray, npts: int):
    if not np.all(np.isfinite(values)):
        raise ValueError("interpolation data contains non-finite values")
    if min(values.shape) < npts:
        raise ValueError(f"need at least {npts} nodes per axis for this scheme, got shape {values.shape}")


def spline_coefficients(values: np.ndarray) -> np.ndarray:
    """Periodic cubic B-spline coefficients along every axis of ``values``."""
    c = np.ascontiguousarray(values, dtype=float)
    if c.ndim == 1:
        return _cyclic_spline_solve(c[:, None])[:, 0]
    c = _cyclic_spline_solve(c)
    return np.ascontiguousarray(_cyclic_spline_solve(np.ascontiguousarray(c.T)).T)


def coefficients(values: np.ndarray, scheme: Scheme) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    _check_values(values, scheme.npts)
    if scheme.kind == "cubic_spline":
        return spline_coefficients(values)
    return values.copy()


def padded(coefs: np.ndarray, scheme: Scheme) -> np.ndarray:
    return np.ascontiguousarray(np.pad(coefs, scheme.pad, mode="wrap"))


@dataclass(frozen=True, eq=False)
class Interpolant1D:
    L: float
    n: int
    scheme: Scheme
    coefs: np.ndarray
    origin: float = 0.0
    cpad: np.ndarray = field(repr=False, default=None)

    @property
    def h(self) -> float:
        return self.L / self.n

    def __call__(self, x):
        return eval_1d(self, x)


@dataclass(frozen=True, eq=False)
class Interpolant2D:
    grid: PhaseGrid
    scheme: Scheme
    coefs: np.ndarray
    cpad: np.ndarray = field(repr=False, default=None)

    def __call__(self, x, v):
        return eval_2d(self, x, v)


def build_1d(values, L: float, scheme: Scheme = CUBIC_SPLINE, origin: float = 0.0) -> Interpolant1D:
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise ValueError("build_1d expects a 1D array")
    c = coefficients(values, scheme)
    return Interpolant1D(float(L), values.size, scheme, c, float(origin), padded(c, scheme))


def build_2d(values, grid: PhaseGrid, scheme: Scheme = LAGRANGE3) -> Interpolant2D:
    values = np.asarray(values, dtype=float)
    if values.shape != grid.shape:
        raise ValueError(f"expected data of shape {grid.shape}, got {values.shape}")
    c = coefficients(values, scheme)
    return Interpolant2D(grid, scheme, c, padded(c, scheme))


def eval_1d(itp: Interpolant1D, x):
    x = np.asarray(x, dtype=float)
    flat = np.ascontiguousarray(x.ravel())
    out = np.empty_like(flat)
    s = itp.scheme
    _eval1d_many(itp.cpad, s.pad, itp.n, itp.origin, itp.n / itp.L, flat, s.code, s.order, s.weights, out)
    return out.reshape(x.shape) if x.ndim else float(out[0])


def _eval2d_raw(ca, cb, grid: PhaseGrid, scheme: Scheme, x, v):
    x, v = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(v, dtype=float))
    xs = np.ascontiguousarray(x.ravel())
    vs = np.ascontiguousarray(v.ravel())
    outa = np.empty_like(xs)
    outb = np.empty_like(xs)
    _eval2d_many(ca[None], cb[None], scheme.pad, grid.Nx, grid.Nv, 0.0, grid.v_min, 1.0 / grid.dx, 1.0 / grid.dv,
                 xs, vs, scheme.code, scheme.order, scheme.weights, outa, outb)
    return outa.reshape(x.shape), outb.reshape(x.shape)


def eval_2d(itp: Interpolant2D, x, v):
    x, v = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(v, dtype=float))
    xs = np.ascontiguousarray(x.ravel())
    vs = np.ascontiguousarray(v.ravel())
    out = np.empty_like(xs)
    g, sch = itp.grid, itp.scheme
    _eval2d_one_many(itp.cpad, sch.pad, g.Nx, g.Nv, 0.0, g.v_min, 1.0 / g.dx, 1.0 / g.dv, xs, vs,
                     sch.code, sch.order, sch.weights, out)
    return out.reshape(x.shape) if x.ndim else float(out[0])


def eval_displacement_2d(delta_x, delta_v, grid: PhaseGrid, X, V, scheme: Scheme = LAGRANGE3):
    """Interpolate both displacement components of a map at query points ``(X, V)``.

    The displacement fields must be periodic; queries are wrapped into the box.
    """
    ca = padded(coefficients(delta_x, scheme), scheme)
    cb = padded(coefficients(delta_v, scheme), scheme)
    return _eval2d_raw(ca, cb, grid, scheme, X, V)
