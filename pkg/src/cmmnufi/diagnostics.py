"""Conserved quantities, damping/growth-rate fits and the memory/cost models."""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields

import numpy as np

from .phasegrid import PhaseGrid, quad_xv

BYTES_PER_FLOAT = 8


@dataclass
class DiagnosticsRecord:
    step: int
    t: float
    mass: float
    momentum: float
    ekin: float
    epot: float
    etot: float
    l1: float
    l2: float
    linf: float
    entropy: float
    f_min: float
    f_max: float
    incomp: float = float("nan")
    memory_bytes: int = 0
    cpu_seconds: float = 0.0

    def as_tuple(self):
        return astuple(self)


#: columns of the diagnostics table; timings go to a separate perf table so the
#: diagnostics file stays byte-identical between runs
TABLE_COLUMNS = tuple(f.name for f in fields(DiagnosticsRecord) if f.name != "cpu_seconds")


def measure(f_samples, E, grid: PhaseGrid, *, vshift: float = 0.0, step: int = 0, t: float = 0.0,
            incomp: float = float("nan"), memory_bytes: int = 0, cpu_seconds: float = 0.0) -> DiagnosticsRecord:
    """Moments and norms of sampled f.

    ``vshift`` handles flow-map samples that skip the leading half kick: those
    samples hold f(x, v - vshift E(x)), so velocity moments are taken about
    ``v - vshift E(x)`` (an exact change of variables, unit Jacobian).
    """
    f = np.asarray(f_samples, dtype=float)
    E = np.asarray(E, dtype=float)
    if f.shape != grid.shape or E.shape != (grid.Nx,):
        raise ValueError(f"shapes {f.shape} / {E.shape} do not match grid {grid.shape}")
    X, V = grid.mesh
    vel = V - vshift * E[:, None] if vshift else V
    epot = 0.5 * grid.dx * float(np.sum(E * E))
    ekin = 0.5 * quad_xv(vel * vel * f, grid)
    pos = f > 0
    flogf = np.zeros_like(f)
    flogf[pos] = f[pos] * np.log(f[pos])
    absf = np.abs(f)
    return DiagnosticsRecord(
        step=step,
        t=t,
        mass=quad_xv(f, grid),
        momentum=quad_xv(vel * f, grid),
        ekin=ekin,
        epot=epot,
        etot=ekin + epot,
        l1=quad_xv(absf, grid),
        l2=math.sqrt(quad_xv(f * f, grid)),
        linf=float(absf.max()),
        entropy=quad_xv(flogf, grid),
        f_min=float(f.min()),
        f_max=float(f.max()),
        incomp=incomp,
        memory_bytes=int(memory_bytes),
        cpu_seconds=cpu_seconds,
    )


def _peaks(t, y):
    """Local maxima of y refined by a parabola through log y at three samples."""
    ly = np.log(y)
    idx = np.where((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]))[0] + 1
    tp, lp = [], []
    for i in idx:
        a, b, c = ly[i - 1], ly[i], ly[i + 1]
        h0, h1 = t[i] - t[i - 1], t[i + 1] - t[i]
        denom = a - 2 * b + c
        if abs(h0 - h1) < 1e-9 * h0 and denom < 0:
            off = 0.5 * (a - c) / denom
            tp.append(t[i] + off * h0)
            lp.append(b - 0.25 * (a - c) * off)
        else:
            tp.append(t[i])
            lp.append(b)
    return np.array(tp), np.array(lp)


def fit_rate(t, epot, window: tuple[float, float] = (5.0, 35.0), mode: str = "decay") -> tuple[float, float]:
    """Field-amplitude rate and angular frequency from the peaks of Epot(t).

    Epot ~ exp(-+2 gamma t) cos^2(omega t), so the log-peaks have slope -+2 gamma
    and consecutive peaks are pi/omega apart.  Decay mode reports gamma > 0 for
    a decaying signal; growth mode reports the growth rate.
    """
    if mode not in ("decay", "growth"):
        raise ValueError(f"mode must be 'decay' or 'growth', got {mode!r}")
    t = np.asarray(t, dtype=float)
    y = np.asarray(epot, dtype=float)
    sel = (t >= window[0]) & (t <= window[1])
    t, y = t[sel], y[sel]
    if t.size and np.ptp(y) == 0:
        return 0.0, 0.0
    if np.any(y <= 0):
        raise ValueError("potential energy must be positive inside the fit window")
    tp, lp = _peaks(t, y)
    if tp.size < 4:
        raise ValueError(f"need at least 4 peaks of Epot in window {window}, found {tp.size}")
    slope = np.polyfit(tp, lp, 1)[0]
    rate = -slope / 2 if mode == "decay" else slope / 2
    return float(rate), float(np.pi / np.mean(np.diff(tp)))


# --------------------------------------------------------------------------- cost models


@dataclass(frozen=True)
class CostModel:
    d: int = 1
    n_f: int = 256
    n_chi: int = 64
    n_remap: int | None = 20
    alpha: int = 3
    n: int = 0
    m: int | None = None

    def __post_init__(self):
        if min(self.d, self.n_f, self.n_chi) < 1 or self.n < 0 or self.alpha < 0:
            raise ValueError("cost model parameters must be positive")
        if self.n_remap is not None and self.n_remap < 1:
            raise ValueError("n_remap must be >= 1 or None")

    @property
    def maps(self) -> int:
        if self.m is not None:
            return self.m
        return 0 if self.n_remap is None else self.n // self.n_remap

    @property
    def segment(self) -> int:
        """NuFI iterations since the last remap."""
        return self.n - self.maps * (self.n_remap or 0)


def model_memory(cm: CostModel) -> dict[str, int]:
    d, M = cm.d, cm.maps
    map_floats = M * 2 * d * cm.n_chi ** (2 * d)
    return {
        "nufi": (cm.n + 1) * cm.n_f**d * BYTES_PER_FLOAT,
        "cmm": map_floats * BYTES_PER_FLOAT,
        "hybrid": (map_floats + (cm.segment + 1) * cm.n_f**d) * BYTES_PER_FLOAT,
    }


def model_cost(cm: CostModel) -> dict[str, int]:
    d, M, n = cm.d, cm.maps, cm.segment
    nf2d = cm.n_f ** (2 * d)
    return {
        "nufi": nf2d * (cm.n + 3) * cm.n // 2,
        "composition": ((cm.alpha + 1) * cm.n_f) ** (2 * d) * M,
        "hybrid": nf2d * ((n + 3) * n // 2 + (cm.alpha + 1) ** (2 * d) * M),
    }


def record_perf(timings) -> tuple[np.ndarray, np.ndarray]:
    per_iter = np.asarray(timings, dtype=float)
    return per_iter, np.cumsum(per_iter)
