"""File formats: snapshots, submaps, run-state archives and the diagnostics tables.

All binary arrays are row-major little-endian float64.  Headers are fixed
little-endian structs following an 8-byte magic string.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .diagnostics import TABLE_COLUMNS, DiagnosticsRecord
from .phasegrid import PhaseGrid

SNAP_MAGIC = b"CNSNAP01"
# step, time, Nx, Nv, Lx, Lv, x_min, v_min
SNAP_HEADER = struct.Struct("<qdqqdddd")
SUBMAP_MAGIC = b"CNSUBM01"
# step, tau, Nx, Nv, Lx, Lv, shear, scheme code, scheme order
SUBMAP_HEADER = struct.Struct("<qdqqdddqq")
STATE_MAGIC = b"CNSTATE1"
F8 = np.dtype("<f8")


class FormatError(ValueError):
    pass


def _array_bytes(a) -> bytes:
    return np.ascontiguousarray(a, dtype=F8).tobytes()


def _read_magic(buf: bytes, magic: bytes, what: str):
    if buf[: len(magic)] != magic:
        raise FormatError(f"not a {what} file (bad magic {buf[:len(magic)]!r})")
    return len(magic)


# --------------------------------------------------------------------------- snapshots


def snapshot_bytes(f, grid: PhaseGrid, step: int, t: float, x_min: float = 0.0, v_min: float | None = None,
                   box: tuple[float, float] | None = None) -> bytes:
    f = np.asarray(f, dtype=float)
    Lx, Lv = box if box is not None else (grid.Lx, grid.Lv)
    v_min = grid.v_min if v_min is None else v_min
    head = SNAP_HEADER.pack(step, t, f.shape[0], f.shape[1], Lx, Lv, x_min, v_min)
    return SNAP_MAGIC + head + _array_bytes(f)


def write_snapshot(path, f, grid: PhaseGrid, step: int, t: float, **kw) -> None:
    Path(path).write_bytes(snapshot_bytes(f, grid, step, t, **kw))


def read_snapshot(path) -> tuple[dict, np.ndarray]:
    buf = Path(path).read_bytes()
    off = _read_magic(buf, SNAP_MAGIC, "snapshot")
    step, t, nx, nv, Lx, Lv, x_min, v_min = SNAP_HEADER.unpack_from(buf, off)
    off += SNAP_HEADER.size
    if len(buf) - off != nx * nv * 8:
        raise FormatError(f"snapshot payload has {len(buf) - off} bytes, expected {nx * nv * 8}")
    f = np.frombuffer(buf, F8, nx * nv, off).reshape(nx, nv).astype(float)
    return dict(step=step, t=t, Nx=nx, Nv=nv, Lx=Lx, Lv=Lv, x_min=x_min, v_min=v_min), f


# --------------------------------------------------------------------------- submaps


def submap_bytes(m) -> bytes:
    g = m.grid
    head = SUBMAP_HEADER.pack(m.step, m.tau, g.Nx, g.Nv, g.Lx, g.Lv, m.shear, m.scheme.code, m.scheme.order)
    return SUBMAP_MAGIC + head + _array_bytes(m.delta_x) + _array_bytes(m.delta_v)


def submap_from_bytes(buf: bytes, off: int = 0):
    from .flowmap import SubMap
    from .interp import LAGRANGE, Scheme

    off += _read_magic(buf[off:], SUBMAP_MAGIC, "submap")
    step, tau, nx, nv, Lx, Lv, shear, code, order = SUBMAP_HEADER.unpack_from(buf, off)
    off += SUBMAP_HEADER.size
    n = nx * nv
    if len(buf) - off < 2 * n * 8:
        raise FormatError("truncated submap payload")
    dx = np.frombuffer(buf, F8, n, off).reshape(nx, nv)
    dv = np.frombuffer(buf, F8, n, off + 8 * n).reshape(nx, nv)
    scheme = Scheme("lagrange", order) if code == LAGRANGE else Scheme("cubic_spline")
    m = SubMap(PhaseGrid(Lx, Lv, nx, nv), dx, dv, shear, scheme, step, tau)
    return m, off + 16 * n


def write_submap(path, m) -> None:
    Path(path).write_bytes(submap_bytes(m))


def read_submap(path):
    buf = Path(path).read_bytes()
    m, end = submap_from_bytes(buf)
    if end != len(buf):
        raise FormatError("trailing bytes after submap")
    return m


# --------------------------------------------------------------------------- run state


def state_bytes(config, state) -> bytes:
    """Manifest (JSON) followed by the raw sections it indexes."""
    from .config import dump_config

    sections = [
        ("config", dump_config(config).encode()),
        ("history", _array_bytes(state.history.fields)),
        ("E", _array_bytes(state.E)),
        ("rho", _array_bytes(state.rho)),
    ]
    sections += [(f"submap_{i}", submap_bytes(m)) for i, m in enumerate(state.stack)]
    manifest = dict(
        t_index=state.t_index, N=state.N, completed=state.completed, history_start=state.history.start,
        history_len=len(state.history), nx=state.grid_f.Nx, sections=[],
    )
    off = 0
    for name, blob in sections:
        manifest["sections"].append(dict(name=name, offset=off, nbytes=len(blob)))
        off += len(blob)
    head = json.dumps(manifest, sort_keys=True).encode()
    return STATE_MAGIC + struct.pack("<Q", len(head)) + head + b"".join(blob for _, blob in sections)


def write_state(path, config, state) -> None:
    Path(path).write_bytes(state_bytes(config, state))


def read_state(path):
    """Returns ``(config, state)`` ready to continue stepping."""
    from .config import parse_text
    from .field import FieldHistory
    from .flowmap import MapStack
    from .stepper import init_run

    buf = Path(path).read_bytes()
    off = _read_magic(buf, STATE_MAGIC, "run-state")
    (hlen,) = struct.unpack_from("<Q", buf, off)
    off += 8
    manifest = json.loads(buf[off: off + hlen])
    base = off + hlen
    blobs = {s["name"]: buf[base + s["offset"]: base + s["offset"] + s["nbytes"]] for s in manifest["sections"]}
    config = parse_text(blobs["config"].decode(), str(path))
    state = init_run(config)
    nx = manifest["nx"]
    fields = np.frombuffer(blobs["history"], F8).reshape(manifest["history_len"], nx)
    h = FieldHistory(config.tau, state.grid_f.Lx, nx, state.history.scheme, manifest["history_start"])
    for E in fields:
        h.append(E.copy())
    maps = []
    i = 0
    while f"submap_{i}" in blobs:
        maps.append(submap_from_bytes(blobs[f"submap_{i}"])[0])
        i += 1
    state.history = h
    state.stack = MapStack(tuple(maps))
    state.E = np.frombuffer(blobs["E"], F8).astype(float)
    state.rho = np.frombuffer(blobs["rho"], F8).astype(float)
    state.t_index, state.N, state.completed = manifest["t_index"], manifest["N"], manifest["completed"]
    return config, state


# --------------------------------------------------------------------------- tables


def _fmt(x) -> str:
    return repr(int(x)) if isinstance(x, (int, np.integer)) else repr(float(x))


def write_table(path, records) -> None:
    lines = [",".join(TABLE_COLUMNS)]
    for r in records:
        lines.append(",".join(_fmt(getattr(r, c)) for c in TABLE_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n")


def read_table(path) -> dict[str, np.ndarray]:
    text = Path(path).read_text().strip().splitlines()
    cols = text[0].split(",")
    data = np.array([[float(x) for x in line.split(",")] for line in text[1:]]).reshape(-1, len(cols))
    return {c: data[:, i] for i, c in enumerate(cols)}


def records_to_columns(records) -> dict[str, np.ndarray]:
    return {c: np.array([getattr(r, c) for r in records], dtype=float) for c in DiagnosticsRecord.__dataclass_fields__}


def write_perf(path, timings) -> None:
    from .diagnostics import record_perf

    per, cum = record_perf(timings)
    lines = ["step,cpu_seconds,cumulative"]
    lines += [f"{i + 1},{p!r},{c!r}" for i, (p, c) in enumerate(zip(per.tolist(), cum.tolist()))]
    Path(path).write_text("\n".join(lines) + "\n")


def write_run(out_dir, config, records, timings, state=None, final_f=None) -> Path:
    from .config import dump_config

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(dump_config(config))
    write_table(out / "diagnostics.csv", records)
    write_perf(out / "perf.csv", timings)
    if state is not None:
        write_state(out / "state.bin", config, state)
    if final_f is not None:
        g = config.grid_f
        step = records[-1].step if records else 0
        write_snapshot(out / "final_f.bin", final_f, g, step, step * config.tau)
    return out
