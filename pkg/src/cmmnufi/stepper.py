"""Hybrid CMM-NuFI driver (pure NuFI is the same driver with remapping switched off).

Each step rebuilds f on the sample grid from scratch: the current segment is
traced back through the stored field history, the result is pushed through the
stored submaps and f0 is evaluated at the final footpoints.  Nothing but f0 is
ever interpolated, so every sample is an f0 value.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import diagnostics, flowmap, io
from .config import RunConfig
from .diagnostics import DiagnosticsRecord, measure
from .field import FieldHistory, charge_density, poisson_solve
from .flowmap import MapStack, RemapPolicy, compose, downsample, remap_needed
from .interp import Scheme
from .nufi import QueryBatch, backtrace_adj
from .phasegrid import InitialCondition, PhaseGrid, eval_f0


class StepError(RuntimeError):
    def __init__(self, step: int, err: Exception):
        super().__init__(f"step {step}: {type(err).__name__}: {err}")
        self.step = step


@dataclass
class SimState:
    grid_f: PhaseGrid
    grid_chi: PhaseGrid
    ic: InitialCondition
    policy: RemapPolicy
    tau: float
    history: FieldHistory
    E: np.ndarray
    rho: np.ndarray
    map_scheme: Scheme = field(default_factory=lambda: Scheme("lagrange", 3))
    stack: MapStack = field(default_factory=MapStack)
    t_index: int = 0
    N: int = 0
    completed: int = 0
    zero_field: bool = False

    @property
    def t(self) -> float:
        return self.t_index * self.tau

    @property
    def M(self) -> int:
        return len(self.stack)

    @property
    def segment_steps(self) -> int:
        """Steps covered by the current (not yet frozen) segment."""
        return self.N - 1 if self.M else self.N

    @property
    def vshift(self) -> float:
        # samples skip the leading half kick of the backward chain
        return 0.5 * self.tau if self.t_index else 0.0

    def memory_bytes(self) -> int:
        maps = sum(m.delta_x.size + m.delta_v.size for m in self.stack)
        return (maps + len(self.history) * self.grid_f.Nx) * diagnostics.BYTES_PER_FLOAT


@dataclass
class StepOutput:
    rho: np.ndarray
    E: np.ndarray
    f: np.ndarray
    record: DiagnosticsRecord
    remapped: bool = False


def _field(state: SimState, rho) -> np.ndarray:
    if state.zero_field:
        return np.zeros(state.grid_f.Nx)
    return poisson_solve(rho, state.grid_f.Lx)


def init_run(config: RunConfig) -> SimState:
    grid_f, ic = config.grid_f, config.ic
    schemes = config.schemes()
    X, V = grid_f.mesh
    rho = charge_density(eval_f0(ic, X, V), grid_f)
    state = SimState(grid_f, config.grid_chi, ic, config.policy, config.tau,
                     FieldHistory(config.tau, grid_f.Lx, grid_f.Nx, schemes["field"]),
                     np.zeros(grid_f.Nx), rho, schemes["map"], zero_field=config.zero_field)
    state.E = _field(state, rho)
    state.history.append(state.E)
    return state


def warm_kernels(state: SimState) -> None:
    """Compile the tracing and composition kernels for this state's schemes on a tiny problem,
    so step timings never include JIT compilation."""
    g = state.grid_chi
    X, V = g.mesh
    h = FieldHistory(state.tau, g.Lx, g.Nx, state.history.scheme)
    for _ in range(3):
        h.append(np.zeros(g.Nx))
    seg = backtrace_adj(QueryBatch(X.ravel()[:8], V.ravel()[:8]), h, 2, False)
    sub = downsample(QueryBatch(X.ravel(), V.ravel()), g, g, 0.0, state.map_scheme)
    compose(MapStack((sub,)), seg)
    flowmap.incompressibility_error(sub)


def _segment(state: SimState, X, V) -> QueryBatch:
    return backtrace_adj(QueryBatch(X, V), state.history, state.N, state.M > 0)


def segment_incompressibility(state: SimState, seg: QueryBatch) -> float:
    """Max |det - 1| of the active segment, from its footpoints on the map grid."""
    sub = downsample(seg, state.grid_f, state.grid_chi, state.segment_steps * state.tau, state.map_scheme)
    return flowmap.incompressibility_error(sub)[1]


def hybrid_step(state: SimState) -> StepOutput:
    g = state.grid_f
    t0 = time.process_time()
    state.N += 1
    state.t_index += 1
    X, V = g.mesh
    seg = _segment(state, X.ravel(), V.ravel())
    foot = compose(state.stack, seg)
    f = eval_f0(state.ic, foot.X, foot.V).reshape(g.shape)
    rho = charge_density(f, g)
    n_seg = state.segment_steps
    incomp = float("nan")
    if state.policy.kind == "adaptive":
        incomp = segment_incompressibility(state, seg)
    E = _field(state, rho)
    remapped = remap_needed(state.policy, n_seg, incomp)
    if remapped:
        sub = downsample(seg, g, state.grid_chi, n_seg * state.tau, state.map_scheme, state.t_index, state.tau)
        state.stack = state.stack.push(sub)
        state.completed += n_seg
        state.N = 1
        state.history = FieldHistory.seeded(E, state.tau, g.Lx, state.history.scheme, start=1)
    else:
        state.history.append(E)
    cpu = time.process_time() - t0
    if not remapped and state.policy.kind != "adaptive":
        incomp = segment_incompressibility(state, seg)
    elif remapped:
        incomp = flowmap.incompressibility_error(state.stack.maps[-1])[1]
    state.E, state.rho = E, rho
    rec = measure(f, E, g, vshift=state.vshift, step=state.t_index, t=state.t, incomp=incomp,
                  memory_bytes=state.memory_bytes(), cpu_seconds=cpu)
    return StepOutput(rho, E, f, rec, remapped)


def initial_record(state: SimState) -> DiagnosticsRecord:
    X, V = state.grid_f.mesh
    f = evaluate_samples(state, X, V)
    return measure(f, state.E, state.grid_f, vshift=state.vshift, step=state.t_index, t=state.t,
                   incomp=0.0 if state.t_index == 0 else float("nan"), memory_bytes=state.memory_bytes())


def evaluate_samples(state: SimState, X, V) -> np.ndarray:
    """f at arbitrary phase-space points at the state's current time (state is not modified)."""
    X = np.asarray(X, dtype=float)
    seg = _segment(state, X.ravel(), np.asarray(V, dtype=float).ravel())
    foot = compose(state.stack, seg)
    return eval_f0(state.ic, foot.X, foot.V).reshape(X.shape)


def evaluate_window(state: SimState, window, nz: int) -> np.ndarray:
    """f on an nz x nz grid of nodes ``xa + i (xb - xa)/nz``, ``va + j (vb - va)/nz``."""
    xa, xb, va, vb = map(float, window)
    if not (xb > xa and vb > va):
        raise ValueError(f"degenerate zoom window {window}")
    if nz < 1:
        raise ValueError(f"zoom resolution must be positive, got {nz}")
    i = np.arange(nz)
    x = xa + i * ((xb - xa) / nz)
    v = va + i * ((vb - va) / nz)
    X, V = np.meshgrid(x, v, indexing="ij")
    return evaluate_samples(state, X, V)


@dataclass
class RunResult:
    records: list
    state: object
    timings: list
    snapshots: dict = field(default_factory=dict)
    remaps: list = field(default_factory=list)


def run(config: RunConfig, out_dir=None, keep_snapshots: bool = False, state=None, steps: int | None = None,
        callback=None) -> RunResult:
    """Drive a flow-map backend to ``t_final`` (or ``steps`` more steps from ``state``)."""
    if config.backend.startswith("sl_"):
        from .baseline_sl import sl_run

        return sl_run(config, out_dir, keep_snapshots)
    out_dir = out_dir if out_dir is not None else (config.output or None)
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
    last_f = None
    if state is None:
        state = init_run(config)
        last_f = eval_f0(state.ic, *state.grid_f.mesh)
        records = [initial_record(state)]
    else:
        records = []
    steps = config.steps if steps is None else steps
    warm_kernels(state)
    timings, snaps, remaps = [], {}, []
    for _ in range(steps):
        try:
            out = hybrid_step(state)
        except Exception as err:
            raise StepError(state.t_index, err) from err
        timings.append(out.record.cpu_seconds)
        last_f = out.f
        if out.remapped:
            remaps.append(state.t_index)
        if state.t_index % config.diag_every == 0:
            records.append(out.record)
        if config.snapshot_every and state.t_index % config.snapshot_every == 0:
            if keep_snapshots:
                snaps[state.t_index] = out.f
            if out_dir is not None:
                io.write_snapshot(Path(out_dir) / f"snapshot_{state.t_index:06d}.bin", out.f, state.grid_f,
                                  state.t_index, state.t)
        if callback is not None:
            callback(state, out)
    if out_dir is not None:
        io.write_run(out_dir, config, records, timings, state, last_f)
    return RunResult(records, state, timings, snaps, remaps)
