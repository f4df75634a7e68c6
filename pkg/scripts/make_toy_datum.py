"""Regenerate src/udckit/data/toy.udc, the datum used by `udckit sample-toy`."""
from pathlib import Path

from udckit.core import GridSpec
from udckit.fitter import fit_udc
from udckit.mesh_io import normalize_mesh
from udckit.shapes import rounded_box
from udckit.udcfile import save_udc

OUT = Path(__file__).resolve().parents[1] / "src" / "udckit" / "data" / "toy.udc"


def main():
    mesh = normalize_mesh(rounded_box((0.4, 0.3, 0.2), 0.08, 12), 0.4)
    udc = fit_udc(mesh, GridSpec((8, 8, 8)))
    save_udc(udc, OUT)
    print(f"wrote {OUT} ({udc.flags_true} flags)")


if __name__ == "__main__":
    main()
