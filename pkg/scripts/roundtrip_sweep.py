"""Fit-then-extract fidelity of the built-in fixtures across resolutions."""
import argparse

from udckit.cli import roundtrip
from udckit.mesh_io import normalize_mesh
from udckit.shapes import box, cube_sphere, rounded_box

FIXTURES = {
    "sphere": lambda: cube_sphere(0.4, 24),
    "rounded_box": lambda: rounded_box((0.35, 0.3, 0.25), 0.08, 24),
    "box": lambda: box((-0.4, -0.3, -0.2), (0.4, 0.3, 0.2)),
}


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--res", type=int, nargs="+", default=[16, 32, 64])
    args = p.parse_args()
    print(f"{'shape':12s} {'res':>4s} {'CD(mean)':>10s} {'CD-L1':>8s} {'bound':>8s} {'nonmfd':>6s}")
    for name, make in FIXTURES.items():
        mesh = normalize_mesh(make(), 0.45)
        for res in args.res:
            r = roundtrip(mesh, res)
            bound = 2 * 3 ** 0.5 / res
            print(f"{name:12s} {res:4d} {r['chamfer_mean']:10.2e} {r['chamfer_l1']:8.4f} {bound:8.4f} {r['nonmanifold_edges']:6d}")


if __name__ == "__main__":
    main()
