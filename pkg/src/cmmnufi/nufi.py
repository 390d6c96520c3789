"""Backward Stormer-Verlet tracing of characteristics through a stored field history."""
from __future__ import annotations

from typing import NamedTuple

import numba
import numpy as np

from .field import FieldHistory
from .interp import LAGRANGE, MAX_STENCIL, SPLINE, eval1d_row


class QueryBatch(NamedTuple):
    X: np.ndarray
    V: np.ndarray


def as_batch(X, V) -> QueryBatch:
    X = np.array(X, dtype=float, copy=True).ravel()
    V = np.array(V, dtype=float, copy=True).ravel()
    if X.shape != V.shape:
        raise ValueError(f"position and velocity arrays differ in size: {X.size} vs {V.size}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(V))):
        raise ValueError("query batch contains non-finite coordinates")
    return QueryBatch(X, V)


@numba.njit(cache=True, inline="always")
def _trace_loop(X, V, cpad, start, N, tau, nx, inv_h, pad, code, m, bw, final_half, w):
    # substep-major: points are independent within a substep, which pipelines far
    # better than following one point through the whole chain
    for n in range(N - 1, 0, -1):
        row = n - start
        for p in range(X.size):
            x = X[p] - tau * V[p]
            X[p] = x
            V[p] += tau * eval1d_row(cpad, row, pad, nx, x * inv_h, code, m, bw, w)
    if final_half:
        for p in range(X.size):
            x = X[p] - tau * V[p]
            X[p] = x
            V[p] += 0.5 * tau * eval1d_row(cpad, 0 - start, pad, nx, x * inv_h, code, m, bw, w)


@numba.njit(cache=True)
def _trace(X, V, cpad, start, N, tau, nx, inv_h, pad, code, m, bw, final_half):
    w = np.empty(MAX_STENCIL)
    if code == SPLINE:
        _trace_loop(X, V, cpad, start, N, tau, nx, inv_h, pad, SPLINE, 3, bw, final_half, w)
    elif m == 3:
        _trace_loop(X, V, cpad, start, N, tau, nx, inv_h, pad, LAGRANGE, 3, bw, final_half, w)
    else:
        _trace_loop(X, V, cpad, start, N, tau, nx, inv_h, pad, code, m, bw, final_half, w)


def _run(batch: QueryBatch, h: FieldHistory, N: int, final_half: bool) -> QueryBatch:
    X, V = as_batch(batch.X, batch.V)
    s = h.scheme
    _trace(X, V, h.padded_coefs, h.start, N, h.tau, h.nx, h.nx / h.Lx, s.pad, s.code, s.order, s.weights,
           final_half)
    return QueryBatch(X, V)


def backtrace(batch: QueryBatch, h: FieldHistory, N: int) -> QueryBatch:
    """Footpoints after N backward Verlet steps, first half kick skipped.

    Full kicks use E^{N-1}..E^1, the closing half kick uses E^0; N=0 is the identity.
    """
    if N < 0:
        raise ValueError(f"step count must be non-negative, got {N}")
    if N == 0:
        return as_batch(batch.X, batch.V)
    if h.start != 0 or h.stop < N:
        raise IndexError(f"history [{h.start}, {h.stop}) cannot cover {N} steps back to E^0")
    return _run(batch, h, N, True)


def backtrace_adj(batch: QueryBatch, h: FieldHistory, N: int, maps_present: bool) -> QueryBatch:
    """Half-step adjusted chain used once submaps exist.

    Without maps this is :func:`backtrace`.  With maps only the N-1 drift/kick
    pairs with E^{N-1}..E^1 are applied; the stored submaps carry the rest.
    """
    if not maps_present:
        return backtrace(batch, h, N)
    if N < 0:
        raise ValueError(f"step count must be non-negative, got {N}")
    if N <= 1:
        return as_batch(batch.X, batch.V)
    if h.start > 1 or h.stop < N:
        raise IndexError(f"history [{h.start}, {h.stop}) cannot cover fields E^1..E^{N - 1}")
    return _run(batch, h, N, False)


def forward_chain(batch: QueryBatch, h: FieldHistory, N: int, maps_present: bool = False) -> QueryBatch:
    """Exact inverse of :func:`backtrace_adj` (each substep inverted in closed form)."""
    X, V = as_batch(batch.X, batch.V)
    if N == 0 or (maps_present and N <= 1):
        return QueryBatch(X, V)
    if not maps_present:
        V = V - 0.5 * h.tau * h.eval(0, X)
        X = X + h.tau * V
    for n in range(1, N):
        V = V - h.tau * h.eval(n, X)
        X = X + h.tau * V
    return QueryBatch(X, V)
