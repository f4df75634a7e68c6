"""udckit command line.

Exit codes: 0 ok, 2 usage or input error, 3 corrupt data.
"""
from __future__ import annotations

import argparse
import json
import logging
import resource
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import diffusion
from .core import GridSpec
from .errors import CorruptUdcError, UdcError
from .extractor import extract_mesh, nonmanifold_edge_count
from .fitter import FitConfig, fit_udc
from .mesh_io import RNG_ALGORITHM, normalize_mesh, parse_obj, sample_surface, save_obj
from .metrics import DistanceKind, chamfer, chamfer_l1, evaluate_sets
from .udcfile import read_udc, save_udc

log = logging.getLogger("udckit")

EXIT_OK, EXIT_USAGE, EXIT_CORRUPT = 0, 2, 3


class CliError(Exception):
    def __init__(self, message, code=EXIT_USAGE):
        super().__init__(message)
        self.code = code


def peak_rss_bytes() -> int:
    # ru_maxrss is reported in kilobytes on Linux
    return int(resource.getrusage(resource.RUSAGE_SELF).ru_maxrss) * 1024


def _load_mesh(path):
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as exc:
        raise CliError(f"cannot open {path}: {exc.strerror or exc}") from None
    try:
        return parse_obj(data)
    except UdcError as exc:
        raise CliError(f"{path}: {exc}") from None


def _load_udc(path):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot open {path}: {exc.strerror or exc}") from None
    try:
        return read_udc(data)
    except CorruptUdcError as exc:
        raise CliError(f"{path}: {exc}", EXIT_CORRUPT) from None


def _check_res(res):
    if res < 2:
        raise CliError("resolution must be ≥ 2")


def _check_margin(margin):
    if not 0 <= margin < 0.5:
        raise CliError("margin must lie in [0, 0.5)")


def _prepare(mesh, margin):
    """Normalize into [-0.5 + margin, 0.5 - margin]^3."""
    try:
        return normalize_mesh(mesh, 0.5 - margin)
    except UdcError as exc:
        raise CliError(str(exc)) from None


def _fit(mesh, res, config):
    try:
        return fit_udc(mesh, GridSpec.cubic(res), config, return_crossings=True)
    except UdcError as exc:
        raise CliError(str(exc)) from None


def _emit(obj, report=None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if report:
        Path(report).write_text(text + "\n")
    print(text)


def fit_one(input_path, res, margin, output_path, config=FitConfig()):
    t0 = time.perf_counter()
    mesh = _prepare(_load_mesh(input_path), margin)
    udc, crossings = _fit(mesh, res, config)
    save_udc(udc, output_path)
    return {
        "cubes": udc.grid.cube_count,
        "flags_true": udc.flags_true,
        "crossings": len(crossings),
        "elapsed_ms": (time.perf_counter() - t0) * 1e3,
        "peak_rss_bytes": peak_rss_bytes(),
    }


def cmd_fit(args):
    _check_res(args.res)
    _check_margin(args.margin)
    config = FitConfig(qef_lambda=args.qef_lambda)
    if args.manifest:
        return _fit_manifest(args, config)
    if not args.input or not args.output:
        raise CliError("fit needs --input and --output (or --manifest)")
    _emit(fit_one(args.input, args.res, args.margin, args.output, config))
    return EXIT_OK


def _fit_manifest(args, config):
    try:
        lines = Path(args.manifest).read_text().splitlines()
    except OSError as exc:
        raise CliError(f"cannot open {args.manifest}: {exc.strerror or exc}") from None
    out_dir = Path(args.output or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    items, failed = [], 0
    for line in lines:
        path = line.strip()
        if not path:
            continue
        try:
            summary = fit_one(path, args.res, args.margin, out_dir / (Path(path).stem + ".udc"), config)
            summary["input"] = path
            items.append(summary)
        except CliError as exc:
            log.error("%s", exc)
            failed += 1
    _emit({"items": items, "failed": failed})
    return EXIT_USAGE if failed else EXIT_OK


def cmd_extract(args):
    udc = _load_udc(args.input)
    mesh = extract_mesh(udc)
    save_obj(mesh, args.output)
    _emit({"vertices": mesh.n_vertices, "triangles": mesh.n_triangles, "flags_true": udc.flags_true})
    return EXIT_OK


def roundtrip(mesh, res, points=20000, seed=0, config=FitConfig()):
    """Fit and extract ``mesh`` (already normalized); report fidelity and cost."""
    t0 = time.perf_counter()
    udc, crossings = _fit(mesh, res, config)
    out = extract_mesh(udc)
    if not out.n_triangles:
        raise CliError("fit produced no faces; mesh too small for the grid")
    a = sample_surface(mesh, points, [seed, 0])
    b = sample_surface(out, points, [seed, 1])
    return {
        "chamfer_mean": chamfer(a, b, "mean"),
        "chamfer_l1": chamfer_l1(a, b),
        "flags_true": udc.flags_true,
        "crossings": len(crossings),
        "triangles_in": mesh.n_triangles,
        "triangles_out": out.n_triangles,
        "nonmanifold_edges": nonmanifold_edge_count(out),
        "resolution": res,
        "points": points,
        "seed": seed,
        "elapsed_ms": (time.perf_counter() - t0) * 1e3,
        "peak_rss_bytes": peak_rss_bytes(),
    }


def cmd_roundtrip(args):
    _check_res(args.res)
    _check_margin(args.margin)
    t0 = time.perf_counter()
    mesh = _prepare(_load_mesh(args.input), args.margin)
    report = roundtrip(mesh, args.res, args.points or 20000, args.seed, FitConfig(qef_lambda=args.qef_lambda))
    report["elapsed_ms"] = (time.perf_counter() - t0) * 1e3
    _emit(report, args.report)
    return EXIT_OK


def sample_mesh_cloud(mesh, points, seed):
    """Normalize to [-0.5, 0.5], sample, scale to [-1, 1]."""
    return 2.0 * sample_surface(normalize_mesh(mesh, 0.5), points, seed)


def _load_dir(path, points, seed):
    d = Path(path)
    if not d.is_dir():
        raise CliError(f"cannot open directory {path}")
    files = sorted(d.glob("*.obj"))
    if not files:
        raise CliError(f"no OBJ files in {path}")
    clouds = []
    for k, f in enumerate(files):
        try:
            clouds.append(sample_mesh_cloud(_load_mesh(f), points, [seed, k]))
        except UdcError as exc:
            raise CliError(f"{f}: {exc}") from None
    return clouds


def cmd_metrics(args):
    try:
        distances = [DistanceKind(d.strip().upper()) for d in args.distance.split(",") if d.strip()]
    except ValueError:
        raise CliError(f"unknown distance in {args.distance!r}") from None
    points = args.points or 2048
    gen = _load_dir(args.gen, points, args.seed)
    ref = _load_dir(args.ref, points, args.seed)
    report = evaluate_sets(gen, ref, distances, args.reduction)
    report["params"] = {
        "points": points,
        "seed": args.seed,
        "distance": [d.value for d in distances],
        "reduction": args.reduction,
        "rng": RNG_ALGORITHM,
        "gen_count": len(gen),
        "ref_count": len(ref),
    }
    _emit(report, args.report)
    return EXIT_OK


def load_toy_datum():
    data = resources.files("udckit").joinpath("data/toy.udc").read_bytes()
    return read_udc(data)


def sample_toy(seed, T):
    """Run the DDPM sampler with the exact denoiser of the stored toy field and
    decode the result back into a UDC field."""
    toy = load_toy_datum()
    v, f = diffusion.normalize_parts(toy)
    datum = diffusion.flatten_parts(v, f)
    schedule = diffusion.make_schedule(T)
    z0 = diffusion.ddpm_sample(diffusion.OracleDenoiser(datum, schedule), datum.shape, seed, schedule)
    v, f = diffusion.unflatten_parts(z0, toy.grid)
    return toy, diffusion.denormalize_parts(toy.grid, v, f), float(np.max(np.abs(z0 - datum)))


def cmd_sample_toy(args):
    if args.T < 1:
        raise CliError("T must be >= 1")
    toy, udc, err = sample_toy(args.seed, args.T)
    save_udc(udc, args.output)
    mesh = extract_mesh(udc)
    if args.obj:
        save_obj(mesh, args.obj)
    _emit({
        "seed": args.seed,
        "schedule": diffusion.make_schedule(args.T).to_dict(),
        "max_abs_latent_error": err,
        "flags_true": udc.flags_true,
        "matches_datum": mesh == extract_mesh(toy),
    })
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="udckit", description="Unsigned dual contouring toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit an OBJ mesh to a UDC file")
    f.add_argument("--input")
    f.add_argument("--output")
    f.add_argument("--manifest", help="newline-separated OBJ paths; --output is a directory")
    f.add_argument("--res", type=int, default=64)
    f.add_argument("--margin", type=float, default=0.05)
    f.add_argument("--qef-lambda", type=float, default=FitConfig.qef_lambda)
    f.set_defaults(func=cmd_fit)

    e = sub.add_parser("extract", help="extract an OBJ mesh from a UDC file")
    e.add_argument("--input", required=True)
    e.add_argument("--output", required=True)
    e.set_defaults(func=cmd_extract)

    r = sub.add_parser("roundtrip", help="fit, extract and measure fidelity")
    r.add_argument("--input", required=True)
    r.add_argument("--res", type=int, default=64)
    r.add_argument("--margin", type=float, default=0.05)
    r.add_argument("--points", type=int, default=None, help="surface samples per mesh (default 20000)")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--qef-lambda", type=float, default=FitConfig.qef_lambda)
    r.add_argument("--report")
    r.set_defaults(func=cmd_roundtrip)

    m = sub.add_parser("metrics", help="CD/EMD based set metrics between two mesh directories")
    m.add_argument("--gen", "--input", dest="gen", required=True)
    m.add_argument("--ref", required=True)
    m.add_argument("--points", type=int, default=None, help="points per mesh (default 2048)")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--distance", default="cd,emd")
    m.add_argument("--reduction", choices=("mean", "sum"), default="mean")
    m.add_argument("--report")
    m.set_defaults(func=cmd_metrics)

    s = sub.add_parser("sample-toy", help="DDPM sampling with the exact denoiser of the toy datum")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--T", type=int, default=diffusion.DEFAULT_STEPS)
    s.add_argument("--output", required=True)
    s.add_argument("--obj")
    s.set_defaults(func=cmd_sample_toy)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"udckit: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
