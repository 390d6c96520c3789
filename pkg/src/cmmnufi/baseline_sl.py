"""Backward semi-Lagrangian predictor-corrector on stored grid samples of f.

The comparison scheme: f itself is interpolated every step, so the scheme is
diffusive (linear interpolation especially) but needs only one grid of storage.

One step from t^n to t^{n+1}, with E^n known:

    predictor   x* = x - tau v,  v* = v + tau E^n(x*),  f~ = I[f^n](x*, v*)  ->  E~
    corrector   v' = v + tau/2 E~(x),  x* = x - tau v',  v* = v' + tau/2 E^n(x*)
                f^{n+1} = I[f^n](x*, v*)  ->  E^{n+1}

The corrector kicks with the time average of E^n and E~, split around the
drift so the backward trace is second order.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import interp
from .config import RunConfig
from .diagnostics import DiagnosticsRecord, measure
from .field import charge_density, poisson_solve
from .interp import Scheme
from .phasegrid import PhaseGrid, eval_f0

ORDERS = {"linear": interp.LINEAR, "cubic": interp.CUBIC_SPLINE}


@dataclass
class GridDistribution:
    f: np.ndarray
    grid: PhaseGrid
    order: str = "cubic"

    def __post_init__(self):
        if self.order not in ORDERS:
            raise ValueError(f"interpolation order must be 'linear' or 'cubic', got {self.order!r}")
        self.f = np.asarray(self.f, dtype=float)
        if self.f.shape != self.grid.shape:
            raise ValueError(f"samples have shape {self.f.shape}, grid is {self.grid.shape}")
        if not np.all(np.isfinite(self.f)):
            raise ValueError("distribution samples contain non-finite values")

    @property
    def scheme(self) -> Scheme:
        return ORDERS[self.order]


def _field_at(E, grid: PhaseGrid, x, scheme: Scheme):
    return interp.eval_1d(interp.build_1d(E, grid.Lx, scheme), x)


def sl_step(dist: GridDistribution, E, tau: float, field_scheme: Scheme = interp.CUBIC_SPLINE,
            zero_field: bool = False, step: int = 0):
    """One predictor-corrector step; returns the new distribution and field."""
    g = dist.grid
    X, V = g.mesh
    itp = interp.build_2d(dist.f, g, dist.scheme)

    def solve(f):
        if not np.all(np.isfinite(f)):
            raise FloatingPointError(f"non-finite samples at step {step}")
        return np.zeros(g.Nx) if zero_field else poisson_solve(charge_density(f, g), g.Lx)

    xs = X - tau * V
    vs = V + tau * _field_at(E, g, xs, field_scheme)
    E_pred = solve(interp.eval_2d(itp, xs, vs))

    vh = V + 0.5 * tau * _field_at(E_pred, g, X, field_scheme)
    xs = X - tau * vh
    vs = vh + 0.5 * tau * _field_at(E, g, xs, field_scheme)
    f_new = interp.eval_2d(itp, xs, vs)
    E_new = solve(f_new)
    return GridDistribution(f_new, g, dist.order), E_new


def sl_order(config: RunConfig) -> str:
    if config.backend == "sl_linear":
        return "linear"
    if config.backend == "sl_cubic":
        return "cubic"
    raise ValueError(f"not a semi-Lagrangian backend: {config.backend!r}")


@dataclass
class SLState:
    dist: GridDistribution
    E: np.ndarray
    tau: float
    t_index: int = 0

    @property
    def t(self) -> float:
        return self.t_index * self.tau

    def memory_bytes(self) -> int:
        return (self.dist.f.size + self.E.size) * 8


def sl_init(config: RunConfig) -> SLState:
    g = config.grid_f
    f0 = eval_f0(config.ic, *g.mesh)
    E = np.zeros(g.Nx) if config.zero_field else poisson_solve(charge_density(f0, g), g.Lx)
    return SLState(GridDistribution(f0, g, sl_order(config)), E, config.tau)


def _record(state: SLState, cpu: float = 0.0) -> DiagnosticsRecord:
    return measure(state.dist.f, state.E, state.dist.grid, step=state.t_index, t=state.t,
                   memory_bytes=state.memory_bytes(), cpu_seconds=cpu)


def sl_run(config: RunConfig, out_dir=None, keep_snapshots: bool = False):
    from . import io
    from .stepper import RunResult, StepError

    out_dir = out_dir if out_dir is not None else (config.output or None)
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
    state = sl_init(config)
    field_scheme = config.schemes()["field"]
    records = [_record(state)]
    timings, snaps = [], {}
    for _ in range(config.steps):
        t0 = time.process_time()
        try:
            state.dist, state.E = sl_step(state.dist, state.E, config.tau, field_scheme, config.zero_field,
                                          state.t_index + 1)
        except Exception as err:
            raise StepError(state.t_index + 1, err) from err
        state.t_index += 1
        cpu = time.process_time() - t0
        timings.append(cpu)
        if state.t_index % config.diag_every == 0:
            records.append(_record(state, cpu))
        if config.snapshot_every and state.t_index % config.snapshot_every == 0:
            if keep_snapshots:
                snaps[state.t_index] = state.dist.f.copy()
            if out_dir is not None:
                io.write_snapshot(Path(out_dir) / f"snapshot_{state.t_index:06d}.bin", state.dist.f,
                                  state.dist.grid, state.t_index, state.t)
    if out_dir is not None:
        io.write_run(out_dir, config, records, timings, None, state.dist.f)
    return RunResult(records, state, timings, snaps)
