"""CPU and memory against remap frequency over 400 Landau steps (wraps ``cmmnufi bench``).

    python scripts/bench_remap.py [configs/bench_landau.ini] [out_dir]
"""
import sys

from cmmnufi.cli import cmd_bench

rows = cmd_bench(sys.argv[1] if len(sys.argv) > 1 else "configs/bench_landau.ini",
                 sys.argv[2] if len(sys.argv) > 2 else "out/bench")
best = min(rows, key=lambda r: r["cpu_seconds"])
print(f"lowest cumulative cpu at n_remap = {best['n_remap']}")
