"""Two-stream instability at 1024^2: Epot growth and max f of the hybrid and the linear SL baseline.

Takes a few minutes per backend.  With --zoom the final hybrid state is sampled
on a 1024^2 window inside a vortex arm.

    python scripts/two_stream.py [--backends hybrid,sl_linear] [--zoom] [--out DIR]
"""
import argparse
from pathlib import Path

import numpy as np

from cmmnufi import io
from cmmnufi.config import default_config
from cmmnufi.stepper import evaluate_window, run


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--backends", default="hybrid,sl_linear")
    p.add_argument("--n-f", type=int, default=1024)
    p.add_argument("--zoom", action="store_true")
    p.add_argument("--out", default="out/two_stream")
    a = p.parse_args()

    f0max = default_config("two_stream").ic.f0_max()
    for backend in a.backends.split(","):
        cfg = default_config("two_stream", backend=backend, n_f=a.n_f)
        res = run(cfg, Path(a.out) / backend)
        ep = np.array([r.epot for r in res.records])
        fm = np.array([r.f_max for r in res.records])
        peak = int(np.argmax(ep))
        dip = int(np.argmin(ep[: peak + 1]))
        print(f"{backend}: Epot {ep[dip]:.2e} (t={res.records[dip].t:.1f}) -> {ep[peak]:.2f} "
              f"(t={res.records[peak].t:.1f}), {np.log10(ep[peak] / ep[dip]):.2f} decades")
        print(f"  max f {fm[0]:.8f} -> {fm[-1]:.8f} (sup f0 {f0max:.8f}), "
              f"strictly decreasing: {bool(np.all(np.diff(fm) < 0))}, step cpu {np.sum(res.timings):.0f}s")
        if a.zoom and backend != "sl_linear" and backend != "sl_cubic":
            window = (8.0, 14.0, -3.0, 0.0)
            fz = evaluate_window(res.state, window, 1024)
            g = res.state.grid_f
            io.write_snapshot(Path(a.out) / backend / "zoom.bin", fz, g, res.state.t_index, res.state.t,
                              x_min=window[0], v_min=window[2], box=(window[1] - window[0], window[3] - window[2]))
            print(f"  zoom {window}: f in [{fz.min():.3e}, {fz.max():.8f}]")


if __name__ == "__main__":
    main()
