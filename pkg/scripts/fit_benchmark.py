"""Fitting cost on ~50k-triangle meshes at 64^3, in the style of a mean
processing-time table. Run single-threaded:

    UDCKIT_THREADS=1 python scripts/fit_benchmark.py --count 10
"""
import argparse
import json
import resource
import time

import numpy as np

from udckit.core import GridSpec
from udckit.fitter import fit_udc
from udckit.mesh_io import normalize_mesh
from udckit.shapes import cube_sphere, rounded_box


def meshes(count, seed):
    rng = np.random.default_rng(seed)
    for n in range(count):
        if n % 2:
            yield cube_sphere(0.4, 65)
        else:
            half = rng.uniform(0.2, 0.45, 3)
            yield rounded_box(half, float(rng.uniform(0.02, half.min() * 0.9)), 65)


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--res", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    grid = GridSpec.cubic(args.res)
    times = []
    for mesh in meshes(args.count, args.seed):
        mesh = normalize_mesh(mesh, 0.45)
        t0 = time.perf_counter()
        fit_udc(mesh, grid)
        times.append(time.perf_counter() - t0)
    print(json.dumps({
        "meshes": args.count,
        "triangles": mesh.n_triangles,
        "mean_seconds": float(np.mean(times)),
        "max_seconds": float(np.max(times)),
        "peak_rss_mb": resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024,
    }, indent=2))


if __name__ == "__main__":
    main()
