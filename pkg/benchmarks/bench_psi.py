"""Time one invariance-operator step under each kernel backend.

    python3 benchmarks/bench_psi.py [--repeat 3] [--threads 1]

Uses the shipped planar example (64 x 64 grid, m = 2, S2 symmetry) with a
full-support measure, the slowest realistic input, plus the 1D examples.
"""
from __future__ import annotations

import argparse
import time
from pathlib import Path

import numpy as np

from starmeasure import kernels
from starmeasure.config import load_config
from starmeasure.gifs import psi
from starmeasure.measures import StarMeasure

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def bench(system, mu, repeat, threads):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = psi(system, mu, threads=threads)
        best = min(best, time.perf_counter() - t0)
    return best, out.values


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}; threads {args.threads}; best of {args.repeat}")
    print(f"{'config':<22}{'support':>9}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for path in sorted(CONFIGS.glob("*.cfg")):
        system = load_config(path).system
        mu = StarMeasure(system.space, np.ones(system.space.size))
        times, outs = [], []
        for name in backends:
            kernels.use_backend(name)
            t, v = bench(system, mu, args.repeat, args.threads)
            times.append(t)
            outs.append(v)
        kernels.use_backend("auto")
        if any(not np.array_equal(outs[0], o) for o in outs[1:]):
            raise SystemExit(f"{path.name}: backends disagree")
        speed = f"{times[-1] / times[0]:9.1f}x" if len(times) > 1 else f"{'-':>10}"
        print(f"{path.stem:<22}{system.space.size:>9}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times) + speed)


if __name__ == "__main__":
    main()
