"""Spatial convergence of the hybrid scheme at T=2 against a 512^2 pure NuFI reference."""
import numpy as np

from cmmnufi.config import default_config
from cmmnufi.stepper import evaluate_samples, run

ref = run(default_config("landau", backend="nufi", n_f=512, n_chi=32, t_final=2.0)).state
ns = np.array([32, 64, 128, 256])
for scheme in ("lagrange3", "cubic_spline"):
    errs = []
    for n in ns:
        cfg = default_config("landau", n_f=int(n), n_chi=int(n), t_final=2.0, n_remap=5,
                             field_interp=scheme, map_interp=scheme)
        st = run(cfg).state
        X, V = cfg.grid_f.mesh
        errs.append(np.abs(evaluate_samples(st, X, V) - evaluate_samples(ref, X, V)).max())
    rates = np.log2(np.array(errs[:-1]) / errs[1:])
    print(scheme)
    for n, e in zip(ns, errs):
        print(f"  N={n:4d}  Linf={e:.3e}")
    print(f"  pairwise orders {np.round(rates, 2)}, fitted {-np.polyfit(np.log(ns), np.log(errs), 1)[0]:.2f}")
