"""Stored backward submaps, their composition and incompressibility monitoring.

A submap is kept as a residual displacement about a free-streaming reference,

    chi(x, v) = (x - s v + delta_x(x, v),  v + delta_v(x, v)),

where ``s`` is the duration of the segment the map covers (``s = 0`` gives the
plain identity reference).  Without the shear term the x-displacement of a
Vlasov map grows like ``s v`` and, once wrapped into the periodic box, jumps by
``Lx`` in the bulk of the distribution; the residual stays small and periodic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numba
import numpy as np

from . import interp
from .interp import LAGRANGE, MAX_STENCIL, SPLINE, Scheme, eval2d_pair
from .nufi import QueryBatch, as_batch
from .phasegrid import PhaseGrid


def minimal_image(d, L: float):
    """Wrap displacements into (-L/2, L/2]."""
    d = np.asarray(d, dtype=float)
    return d - L * np.ceil(d / L - 0.5)


@dataclass(frozen=True, eq=False)
class SubMap:
    grid: PhaseGrid
    delta_x: np.ndarray
    delta_v: np.ndarray
    shear: float = 0.0
    scheme: Scheme = interp.LAGRANGE3
    step: int = 0
    tau: float = 0.0
    _pads: tuple = field(init=False, repr=False, default=None)

    def __post_init__(self):
        for name in ("delta_x", "delta_v"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.shape != self.grid.shape:
                raise ValueError(f"{name} must have shape {self.grid.shape}, got {a.shape}")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} contains non-finite values")
            a = a.copy()
            a.flags.writeable = False
            object.__setattr__(self, name, a)
        pads = (interp.padded(interp.coefficients(self.delta_x, self.scheme), self.scheme),
                interp.padded(interp.coefficients(self.delta_v, self.scheme), self.scheme))
        object.__setattr__(self, "_pads", pads)

    @classmethod
    def identity(cls, grid: PhaseGrid, scheme: Scheme = interp.LAGRANGE3) -> "SubMap":
        z = np.zeros(grid.shape)
        return cls(grid, z, z, 0.0, scheme)

    @classmethod
    def from_footpoints(cls, chi_x, chi_v, grid: PhaseGrid, shear: float = 0.0,
                        scheme: Scheme = interp.LAGRANGE3, step: int = 0, tau: float = 0.0) -> "SubMap":
        X, V = grid.mesh
        dx = minimal_image(np.asarray(chi_x) - (X - shear * V), grid.Lx)
        dv = minimal_image(np.asarray(chi_v) - V, grid.Lv)
        return cls(grid, dx, dv, float(shear), scheme, step, tau)

    @property
    def chi_x(self) -> np.ndarray:
        X, V = self.grid.mesh
        return X - self.shear * V + self.delta_x

    @property
    def chi_v(self) -> np.ndarray:
        return self.grid.mesh[1] + self.delta_v

    def __call__(self, X, V) -> QueryBatch:
        return compose(MapStack((self,)), as_batch(X, V))


@dataclass(frozen=True, eq=False)
class MapStack:
    """Submaps oldest first; evaluation applies the newest map first."""

    maps: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        if self.maps:
            g, s = self.maps[0].grid, self.maps[0].scheme
            for m in self.maps[1:]:
                if m.grid != g:
                    raise ValueError("all submaps of a stack must share one map grid")
                if m.scheme != s:
                    raise ValueError("all submaps of a stack must share one interpolation scheme")

    def __len__(self):
        return len(self.maps)

    def __iter__(self):
        return iter(self.maps)

    def push(self, m: SubMap) -> "MapStack":
        return MapStack(self.maps + (m,))

    @property
    def grid(self) -> PhaseGrid | None:
        return self.maps[0].grid if self.maps else None

    @property
    def scheme(self) -> Scheme | None:
        return self.maps[0].scheme if self.maps else None

    @cached_property
    def _slabs(self):
        ca = np.ascontiguousarray(np.stack([m._pads[0] for m in self.maps]))
        cb = np.ascontiguousarray(np.stack([m._pads[1] for m in self.maps]))
        shears = np.array([m.shear for m in self.maps], dtype=float)
        return ca, cb, shears


@numba.njit(cache=True, inline="always")
def _apply_map(X, V, ca, cb, i, sh, pad, n1, n2, ih1, ih2, v0, code, m, bw, w1, w2):
    for p in range(X.size):
        x = X[p]
        v = V[p]
        a, b = eval2d_pair(ca, cb, i, pad, n1, n2, x * ih1, (v - v0) * ih2, code, m, bw, w1, w2)
        X[p] = x - sh * v + a
        V[p] = v + b


@numba.njit(cache=True)
def _compose(X, V, ca, cb, shears, pad, n1, n2, ih1, ih2, v0, code, m, bw):
    w1 = np.empty(MAX_STENCIL)
    w2 = np.empty(MAX_STENCIL)
    # map-major order keeps one map's coefficients in cache for the whole batch;
    # the literal scheme arguments let the compiler specialise the common stencils
    for i in range(shears.size - 1, -1, -1):
        if code == SPLINE:
            _apply_map(X, V, ca, cb, i, shears[i], pad, n1, n2, ih1, ih2, v0, SPLINE, 3, bw, w1, w2)
        elif m == 3:
            _apply_map(X, V, ca, cb, i, shears[i], pad, n1, n2, ih1, ih2, v0, LAGRANGE, 3, bw, w1, w2)
        else:
            _apply_map(X, V, ca, cb, i, shears[i], pad, n1, n2, ih1, ih2, v0, code, m, bw, w1, w2)


def compose(stack: MapStack, batch: QueryBatch) -> QueryBatch:
    """chi^(1) o ... o chi^(M) applied to the batch; empty stack is the identity."""
    X, V = as_batch(batch.X, batch.V)
    if not len(stack):
        return QueryBatch(X, V)
    g, s = stack.grid, stack.scheme
    ca, cb, shears = stack._slabs
    _compose(X, V, ca, cb, shears, s.pad, g.Nx, g.Nv, 1.0 / g.dx, 1.0 / g.dv, g.v_min, s.code, s.order, s.weights)
    return QueryBatch(X, V)


def downsample(fine: QueryBatch, fine_grid: PhaseGrid, coarse: PhaseGrid, shear: float = 0.0,
               scheme: Scheme = interp.LAGRANGE3, step: int = 0, tau: float = 0.0) -> SubMap:
    """Submap from footpoints given on every fine node, by exact subsampling."""
    if (fine_grid.Lx, fine_grid.Lv) != (coarse.Lx, coarse.Lv):
        raise ValueError("fine and coarse grids must span the same box")
    if fine_grid.Nx % coarse.Nx or fine_grid.Nv % coarse.Nv:
        raise ValueError(f"fine grid {fine_grid.shape} is not an integer refinement of {coarse.shape}")
    sx, sv = fine_grid.Nx // coarse.Nx, fine_grid.Nv // coarse.Nv
    X = np.asarray(fine.X).reshape(fine_grid.shape)[::sx, ::sv]
    V = np.asarray(fine.V).reshape(fine_grid.shape)[::sx, ::sv]
    return SubMap.from_footpoints(X, V, coarse, shear, scheme, step, tau)


# --------------------------------------------------------------------------- incompressibility


def _d_periodic(f, h, axis):
    fp1 = np.roll(f, -1, axis)
    fp2 = np.roll(f, -2, axis)
    fm1 = np.roll(f, 1, axis)
    fm2 = np.roll(f, 2, axis)
    return (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * h)


def _d_open(f, h, axis):
    """Fourth-order differences, one-sided on the two rows at each end."""
    f = np.moveaxis(f, axis, 0)
    d = np.empty_like(f)
    d[2:-2] = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / (12 * h)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    return np.moveaxis(d, 0, axis)


def jacobian_det(delta_x, delta_v, grid: PhaseGrid, shear: float = 0.0) -> np.ndarray:
    """det of the map Jacobian from its residual displacement fields.

    x-derivatives are periodic; v-derivatives are open because a Vlasov map is
    only approximately periodic across the velocity cut.
    """
    a = 1.0 + _d_periodic(delta_x, grid.dx, 0)
    b = -shear + _d_open(delta_x, grid.dv, 1)
    c = _d_periodic(delta_v, grid.dx, 0)
    d = 1.0 + _d_open(delta_v, grid.dv, 1)
    return a * d - b * c


def incompressibility_error(obj, grid: PhaseGrid | None = None):
    """|det grad chi - 1| on the map grid and its maximum.

    Accepts a SubMap, a MapStack (composed at its own grid nodes) or footpoint
    arrays ``(chi_x, chi_v, shear)`` sampled on ``grid``.
    """
    if isinstance(obj, SubMap):
        g, dx, dv, s = obj.grid, obj.delta_x, obj.delta_v, obj.shear
    elif isinstance(obj, MapStack):
        if not len(obj):
            g = grid
            if g is None:
                raise ValueError("an empty stack needs an explicit grid")
            z = np.zeros(g.shape)
            return z, 0.0
        g = obj.grid
        X, V = g.mesh
        s = sum(m.shear for m in obj)
        out = compose(obj, QueryBatch(X.ravel(), V.ravel()))
        # composed footpoints are never wrapped, so the residuals stay smooth even
        # when the total displacement exceeds half the box
        dx = out.X.reshape(g.shape) - (X - s * V)
        dv = out.V.reshape(g.shape) - V
    else:
        chi_x, chi_v, s = obj
        g = grid
        m = SubMap.from_footpoints(chi_x, chi_v, g, s)
        dx, dv = m.delta_x, m.delta_v
    err = np.abs(jacobian_det(dx, dv, g, s) - 1.0)
    return err, float(err.max())


# --------------------------------------------------------------------------- remapping


@dataclass(frozen=True)
class RemapPolicy:
    kind: str = "fixed"
    n_remap: int = 20
    delta: float = 1e-2

    def __post_init__(self):
        if self.kind not in ("fixed", "adaptive", "never"):
            raise ValueError(f"unknown remap policy {self.kind!r}")
        if self.kind == "fixed" and self.n_remap < 1:
            raise ValueError(f"n_remap must be >= 1, got {self.n_remap}")
        if self.kind == "adaptive" and not self.delta >= 0:
            raise ValueError(f"incompressibility threshold must be >= 0, got {self.delta}")


def remap_needed(policy: RemapPolicy, n: int, incomp: float = 0.0) -> bool:
    """Whether the current segment, ``n`` steps long, should be frozen into a submap."""
    if policy.kind == "never" or n < 1:
        return False
    if policy.kind == "fixed":
        return n % policy.n_remap == 0
    if policy.delta <= 0:
        return True
    return incomp > policy.delta


def compositional_refinement(m: int, degree: int = 3) -> tuple[int, int]:
    """(stored coefficients, coefficients of the represented polynomial) for m composed maps."""
    return (degree + 1) * m, degree**m + 1
