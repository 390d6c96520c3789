"""Composition of the volume-preserving shear (x + sin v, v): map error and incompressibility vs grid."""
import numpy as np

from cmmnufi.flowmap import MapStack, SubMap, compose, incompressibility_error
from cmmnufi.nufi import as_batch
from cmmnufi.phasegrid import PhaseGrid

L = 2 * np.pi
COUNT = 20
rng = np.random.default_rng(0)
q = as_batch(rng.uniform(0, L, 4000), rng.uniform(-L / 2, L / 2, 4000))

print(f"{'N_chi':>6} {'Linf error':>11} {'max incomp (1..20 maps)':>24}")
errs = []
ns = [32, 64, 128, 256, 512]
for n in ns:
    g = PhaseGrid(L, L, n, n)
    X, V = g.mesh
    m = SubMap.from_footpoints(X + np.sin(V), V, g)
    out = compose(MapStack((m,) * COUNT), q)
    errs.append(np.abs(out.X - (q.X + COUNT * np.sin(q.V))).max())
    inc = max(incompressibility_error(MapStack((m,) * k))[1] for k in range(1, COUNT + 1))
    print(f"{n:6d} {errs[-1]:11.3e} {inc:24.3e}")
print(f"fitted order {-np.polyfit(np.log(ns), np.log(errs), 1)[0]:.2f}")
