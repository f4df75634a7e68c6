"""1-NNA between two independent samples of one distribution, over seeds.
Values near 50 mean the metric cannot tell the sets apart."""
import argparse

import numpy as np

from udckit.mesh_io import make_rng
from udckit.metrics import distance_matrix, one_nna_from_matrices


def gaussian_sets(seed, n_clouds=200, n_points=16):
    rng = make_rng(seed)
    x = rng.standard_normal((n_clouds, n_points, 3)) * 0.3
    y = rng.standard_normal((n_clouds, n_points, 3)) * 0.3
    return list(x), list(y)


def nna_for_seed(seed, n_clouds=200, n_points=16):
    x, y = gaussian_sets(seed, n_clouds, n_points)
    return one_nna_from_matrices(distance_matrix(x, x), distance_matrix(x, y), distance_matrix(y, y))


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--clouds", type=int, default=200)
    p.add_argument("--points", type=int, default=16)
    args = p.parse_args()
    vals = [nna_for_seed(s, args.clouds, args.points) for s in range(args.seeds)]
    for s, v in enumerate(vals):
        print(f"seed {s:3d}  1-NNA {v:6.2f}")
    print(f"mean {np.mean(vals):.2f}  std {np.std(vals):.2f}")


if __name__ == "__main__":
    main()
