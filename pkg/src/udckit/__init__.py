"""Unsigned dual contouring (UDC): mesh fitting and extraction, a binary
field format, point-cloud generation metrics and DDPM sampling maths."""
from .core import GridSpec, TriangleMesh, UdcField, cardinalities, edge_cube_neighbors
from .extractor import extract_mesh
from .fitter import FitConfig, compute_edge_crossings, fit_udc, solve_cell_vertex
from .mesh_io import normalize_mesh, parse_obj, sample_surface, write_obj
from .udcfile import read_udc, write_udc

__all__ = [
    "GridSpec", "TriangleMesh", "UdcField", "cardinalities", "edge_cube_neighbors",
    "extract_mesh", "FitConfig", "compute_edge_crossings", "fit_udc", "solve_cell_vertex",
    "normalize_mesh", "parse_obj", "sample_surface", "write_obj", "read_udc", "write_udc",
]
