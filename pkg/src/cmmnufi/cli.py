"""Command line: ``cmmnufi run|zoom|bench|compare``."""
from __future__ import annotations

import argparse
import configparser
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import ConfigError, RunConfig, dump_config, parse_config, parse_text
from .diagnostics import CostModel, model_cost, model_memory

__all__ = ["RunConfig", "parse_config", "cmd_run", "cmd_zoom", "cmd_bench", "cmd_compare", "main"]


def cmd_run(config: RunConfig | str | Path, out_dir=None) -> Path:
    from .stepper import run

    cfg = config if isinstance(config, RunConfig) else parse_config(config)
    out = Path(out_dir or cfg.output or "run_out")
    run(cfg, out)
    return out


def parse_window(text: str) -> tuple[float, float, float, float]:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise ValueError(f"window must be four comma-separated numbers, got {text!r}") from None
    if len(vals) != 4:
        raise ValueError(f"window must be xa,xb,va,vb, got {text!r}")
    return vals


def cmd_zoom(state_path, window, nz: int, out_path=None) -> Path:
    from .stepper import evaluate_window

    cfg, state = io.read_state(state_path)
    if isinstance(window, str):
        window = parse_window(window)
    f = evaluate_window(state, window, nz)
    xa, xb, va, vb = window
    out = Path(out_path) if out_path else Path(state_path).with_name("zoom.bin")
    io.write_snapshot(out, f, state.grid_f, state.t_index, state.t, x_min=xa, v_min=va, box=(xb - xa, vb - va))
    return out


def _parse_sweep(path):
    """A run config plus a ``[sweep]`` section: ``n_remap = 5, 10, 20, 40, inf`` and ``steps``."""
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    text = Path(path).read_text()
    cp.read_string(text, source=str(path))
    if not cp.has_section("sweep"):
        raise ConfigError(f"{path}: sweep config needs a [sweep] section")
    sweep = dict(cp.items("sweep"))
    unknown = set(sweep) - {"n_remap", "steps"}
    if unknown:
        raise ConfigError(f"sweep.{sorted(unknown)[0]}: unknown key")
    values = []
    for tok in sweep.get("n_remap", "20").split(","):
        tok = tok.strip().lower()
        if tok in ("inf", "never", "none"):
            values.append(None)
        else:
            try:
                values.append(int(tok))
            except ValueError:
                raise ConfigError(f"sweep.n_remap: expected integers or inf, got {tok!r}") from None
    cp.remove_section("sweep")
    rest = "\n".join(f"[{s}]\n" + "\n".join(f"{k} = {v}" for k, v in cp.items(s)) for s in cp.sections())
    base = parse_text(rest, str(path))
    steps = int(sweep.get("steps", base.steps))
    return base, values, steps


def cmd_bench(sweep_path, out_dir=None) -> list[dict]:
    from .stepper import run

    base, values, steps = _parse_sweep(sweep_path)
    rows = []
    for n_remap in values:
        if n_remap is None:
            cfg = base.with_(backend="nufi", remap="never", t_final=steps * base.tau)
        else:
            cfg = base.with_(backend="hybrid", remap="fixed", n_remap=n_remap, t_final=steps * base.tau)
        res = run(cfg, out_dir=None)
        cm = CostModel(1, cfg.n_f, cfg.n_chi, n_remap, 3, steps)
        rows.append(dict(
            n_remap="inf" if n_remap is None else n_remap,
            cpu_seconds=float(np.sum(res.timings)),
            memory_bytes=res.records[-1].memory_bytes,
            model_memory=model_memory(cm)["hybrid"],
            model_cost=model_cost(cm)["hybrid"],
        ))
    lines = ["n_remap,cpu_seconds,memory_bytes,model_memory,model_cost"]
    lines += [f"{r['n_remap']},{r['cpu_seconds']:.4f},{r['memory_bytes']},{r['model_memory']},{r['model_cost']}"
              for r in rows]
    table = "\n".join(lines) + "\n"
    print(table, end="")
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "bench.csv").write_text(table)
    return rows


def cmd_compare(dir_a, dir_b) -> dict[str, float]:
    """Max-norm differences of every diagnostics column and of the final f samples."""
    a = io.read_table(Path(dir_a) / "diagnostics.csv")
    b = io.read_table(Path(dir_b) / "diagnostics.csv")
    if list(a) != list(b) or len(a["step"]) != len(b["step"]):
        raise ValueError("diagnostics tables have different columns or lengths")
    report = {}
    for c in a:
        report[c] = float(np.nanmax(np.abs(a[c] - b[c]))) if np.any(np.isfinite(a[c] - b[c])) else 0.0
    fa, fb = Path(dir_a) / "final_f.bin", Path(dir_b) / "final_f.bin"
    if fa.exists() and fb.exists():
        fa, fb = io.read_snapshot(fa)[1], io.read_snapshot(fb)[1]
        if fa.shape != fb.shape:
            raise ValueError(f"final snapshots differ in shape: {fa.shape} vs {fb.shape}")
        report["final_f"] = float(np.max(np.abs(fa - fb)))
    for k, v in report.items():
        print(f"{k},{v!r}")
    return report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cmmnufi", description="Hybrid CMM-NuFI Vlasov-Poisson solver")
    sub = p.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run a configuration")
    r.add_argument("config")
    r.add_argument("--out", default=None, help="output directory (default: output.directory or ./run_out)")
    z = sub.add_parser("zoom", help="evaluate f on a window of a saved run state")
    z.add_argument("state")
    z.add_argument("--window", required=True, help="xa,xb,va,vb")
    z.add_argument("--n", type=int, required=True, help="window resolution")
    z.add_argument("--out", default=None)
    b = sub.add_parser("bench", help="CPU/memory sweep over remap frequencies")
    b.add_argument("sweep")
    b.add_argument("--out", default=None)
    c = sub.add_parser("compare", help="max-norm differences between two run directories")
    c.add_argument("dir_a")
    c.add_argument("dir_b")
    d = sub.add_parser("dump-config", help="print a config with all defaults filled in")
    d.add_argument("config")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "run":
            print(cmd_run(args.config, args.out))
        elif args.cmd == "zoom":
            print(cmd_zoom(args.state, args.window, args.n, args.out))
        elif args.cmd == "bench":
            cmd_bench(args.sweep, args.out)
        elif args.cmd == "compare":
            cmd_compare(args.dir_a, args.dir_b)
        elif args.cmd == "dump-config":
            print(dump_config(parse_config(args.config)), end="")
    except (ConfigError, ValueError, OSError, io.FormatError, RuntimeError) as err:
        print(f"cmmnufi {args.cmd}: error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
