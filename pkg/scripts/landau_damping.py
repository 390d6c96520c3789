"""Weak Landau damping: fitted rate and frequency, conservation drifts, per-step CPU.

    python scripts/landau_damping.py [--backend hybrid|nufi|sl_cubic|sl_linear] [--out DIR]
"""
import argparse

import numpy as np

from cmmnufi.config import default_config
from cmmnufi.diagnostics import fit_rate
from cmmnufi.stepper import run


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--backend", default="hybrid")
    p.add_argument("--n-f", type=int, default=256)
    p.add_argument("--n-chi", type=int, default=128)
    p.add_argument("--n-remap", type=int, default=20)
    p.add_argument("--out", default=None)
    a = p.parse_args()

    cfg = default_config("landau", backend=a.backend, n_f=a.n_f, n_chi=a.n_chi, n_remap=a.n_remap)
    res = run(cfg, a.out)
    col = {k: np.array([getattr(r, k) for r in res.records]) for k in ("t", "epot", "mass", "l2", "entropy", "etot")}
    gamma, omega = fit_rate(col["t"], col["epot"])
    print(f"backend {a.backend}: gamma = {gamma:.5f}, omega = {omega:.5f}")
    for k in ("mass", "l2", "entropy", "etot"):
        print(f"  relative {k} drift {abs(col[k][-1] - col[k][0]) / abs(col[k][0]):.2e}")
    print(f"  step cpu {np.sum(res.timings):.2f}s, remaps at {res.remaps[:5]}{' ...' if len(res.remaps) > 5 else ''}")


if __name__ == "__main__":
    main()
