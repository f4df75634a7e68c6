"""Point-cloud and set-level shape generation metrics.

Single-pair distances: Chamfer (CD) and Earth mover's distance (EMD).
Set-level: JSD over voxelized marginals, coverage (COV), minimum matching
distance (MMD) and 1-nearest-neighbour accuracy (1-NNA).

Reductions: ``chamfer`` sums squared nearest-neighbour distances per
direction for ``reduction="sum"`` and averages them for ``"mean"`` (the
default, which gives values independent of the point count). EMD is the
optimal assignment cost divided by the number of points.
"""
from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, Sequence, Union

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .mesh_io import as_point_cloud


class DistanceKind(str, enum.Enum):
    CD = "CD"
    EMD = "EMD"


Distance = Union[DistanceKind, str, Callable]


def worker_count() -> int:
    """Workers allowed by ``UDCKIT_THREADS`` (default 1)."""
    raw = os.environ.get("UDCKIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _nonempty(p, name):
    p = as_point_cloud(p)
    if not len(p):
        raise ValueError(f"{name} is an empty point cloud")
    return p


def _reduce(d2: np.ndarray, reduction: str) -> float:
    if reduction == "sum":
        return float(d2.sum())
    if reduction == "mean":
        return float(d2.mean())
    raise ValueError(f"unknown reduction {reduction!r}")


def nearest_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """For each point of ``a`` the squared distance to its nearest point in ``b``."""
    if len(a) * len(b) <= 1 << 16:
        diff = a[:, None, :] - b[None, :, :]
        return np.einsum("ijk,ijk->ij", diff, diff).min(axis=1)
    d, _ = cKDTree(b).query(a, k=1)
    return d * d


def chamfer(a, b, reduction: str = "mean") -> float:
    a = _nonempty(a, "a")
    b = _nonempty(b, "b")
    return _reduce(nearest_sq_dists(a, b), reduction) + _reduce(nearest_sq_dists(b, a), reduction)


def chamfer_l1(a, b) -> float:
    """Symmetric mean of unsquared nearest-neighbour distances."""
    a = _nonempty(a, "a")
    b = _nonempty(b, "b")
    return float(np.sqrt(nearest_sq_dists(a, b)).mean() + np.sqrt(nearest_sq_dists(b, a)).mean())


def emd(a, b) -> float:
    """Mean per-point cost of the optimal bijection between equal-size clouds."""
    a = _nonempty(a, "a")
    b = _nonempty(b, "b")
    if len(a) != len(b):
        raise ValueError(f"EMD needs equal-size clouds, got {len(a)} and {len(b)}")
    cost = cdist(a, b)
    rows, cols = linear_sum_assignment(cost)
    # sorted summation makes emd(a, b) and emd(b, a) bitwise equal, so exact ties stay ties
    return float(np.sort(cost[rows, cols]).sum() / len(a))


def voxel_distribution(clouds: Iterable, voxel_res: int = 28) -> np.ndarray:
    """Occupancy histogram of all points over ``voxel_res^3`` bins of
    ``[-1, 1]^3``, normalized to sum to 1. Points outside are clipped to the
    border bins."""
    counts = np.zeros(voxel_res ** 3, dtype=np.int64)
    for c in clouds:
        c = as_point_cloud(c)
        if not len(c):
            continue
        ijk = np.clip(np.floor((c + 1.0) * 0.5 * voxel_res).astype(np.int64), 0, voxel_res - 1)
        lin = ijk[:, 0] + voxel_res * (ijk[:, 1] + voxel_res * ijk[:, 2])
        counts += np.bincount(lin, minlength=voxel_res ** 3)
    total = counts.sum()
    if total == 0:
        raise ValueError("no points to build a distribution from")
    return counts / total


def _kl(p, q):
    m = p > 0
    return float(np.sum(p[m] * np.log(p[m] / q[m])))


def jsd_from_distributions(p: np.ndarray, q: np.ndarray) -> float:
    m = 0.5 * (p + q)
    return 0.5 * _kl(p, m) + 0.5 * _kl(q, m)


def jsd(a_set: Sequence, b_set: Sequence, voxel_res: int = 28) -> float:
    """Jensen-Shannon divergence (natural log) of the voxelized marginals."""
    if not len(a_set) or not len(b_set):
        raise ValueError("JSD needs two non-empty sets of point clouds")
    return jsd_from_distributions(voxel_distribution(a_set, voxel_res),
                                  voxel_distribution(b_set, voxel_res))


def _kind(d: Distance):
    """DistanceKind for a tag, None for a user callable."""
    if isinstance(d, DistanceKind):
        return d
    if isinstance(d, str):
        return DistanceKind(d.upper())
    if callable(d):
        return None
    raise ValueError(f"unknown distance {d!r}")


def _distance_fn(d: Distance, reduction: str) -> Callable:
    kind = _kind(d)
    if kind is None:
        return d
    if kind is DistanceKind.CD:
        return lambda a, b: chamfer(a, b, reduction)
    return emd


def _batched_chamfer(a: np.ndarray, b: np.ndarray, reduction: str) -> np.ndarray:
    """CD matrix for stacks of equal-size clouds, shapes (n, p, 3), (m, q, 3)."""
    out = np.empty((len(a), len(b)))
    p, q = a.shape[1], b.shape[1]
    step = max(1, (1 << 20) // max(1, len(b) * p * q))
    for s in range(0, len(a), step):
        diff = a[s:s + step, None, :, None, :] - b[None, :, None, :, :]
        d2 = np.einsum("nmpqk,nmpqk->nmpq", diff, diff)
        ab, ba = d2.min(axis=3), d2.min(axis=2)
        if reduction == "mean":
            out[s:s + step] = ab.mean(axis=2) + ba.mean(axis=2)
        elif reduction == "sum":
            out[s:s + step] = ab.sum(axis=2) + ba.sum(axis=2)
        else:
            raise ValueError(f"unknown reduction {reduction!r}")
    return out


def distance_matrix(gen: Sequence, ref: Sequence, d: Distance = DistanceKind.CD,
                    reduction: str = "mean") -> np.ndarray:
    """``(|gen|, |ref|)`` matrix of pairwise cloud distances."""
    gen = [_nonempty(g, "gen cloud") for g in gen]
    ref = [_nonempty(r, "ref cloud") for r in ref]
    if not gen or not ref:
        raise ValueError("distance matrix needs two non-empty sets")
    sizes = {len(c) for c in gen} | {len(c) for c in ref}
    if _kind(d) is DistanceKind.CD and len(sizes) == 1 and next(iter(sizes)) <= 64:
        return _batched_chamfer(np.stack(gen), np.stack(ref), reduction)
    fn = _distance_fn(d, reduction)
    pairs = [(i, j) for i in range(len(gen)) for j in range(len(ref))]
    out = np.empty((len(gen), len(ref)))
    workers = worker_count()
    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            vals = list(pool.map(lambda ij: fn(gen[ij[0]], ref[ij[1]]), pairs))
    else:
        vals = [fn(gen[i], ref[j]) for i, j in pairs]
    for (i, j), v in zip(pairs, vals):
        out[i, j] = v
    return out


def coverage_from_matrix(dist: np.ndarray) -> float:
    """Fraction of reference columns that are some row's nearest match.
    ``argmin`` returns the first minimum, i.e. the lowest reference index."""
    dist = np.asarray(dist)
    matched = np.unique(np.argmin(dist, axis=1))
    return len(matched) / dist.shape[1]


def mmd_from_matrix(dist: np.ndarray) -> float:
    return float(np.asarray(dist).min(axis=0).mean())


def one_nna_from_matrices(dxx: np.ndarray, dxy: np.ndarray, dyy: np.ndarray) -> float:
    """1-NNA in percent. An element counts as correctly classified only if no
    element of the other set is at least as close as its nearest same-set
    neighbour."""
    dxx = np.array(dxx, dtype=np.float64)
    dyy = np.array(dyy, dtype=np.float64)
    dxy = np.asarray(dxy, dtype=np.float64)
    np.fill_diagonal(dxx, np.inf)
    np.fill_diagonal(dyy, np.inf)
    x_own = dxx.min(axis=1) < dxy.min(axis=1)
    y_own = dyy.min(axis=1) < dxy.min(axis=0)
    return 100.0 * (x_own.sum() + y_own.sum()) / (len(x_own) + len(y_own))


def coverage(gen: Sequence, ref: Sequence, d: Distance = DistanceKind.CD, reduction: str = "mean") -> float:
    return coverage_from_matrix(distance_matrix(gen, ref, d, reduction))


def mmd(gen: Sequence, ref: Sequence, d: Distance = DistanceKind.CD, reduction: str = "mean") -> float:
    return mmd_from_matrix(distance_matrix(gen, ref, d, reduction))


def one_nna(x: Sequence, y: Sequence, d: Distance = DistanceKind.CD, reduction: str = "mean") -> float:
    if not len(x) or not len(y):
        raise ValueError("1-NNA needs two non-empty sets")
    if len(x) + len(y) < 2:
        raise ValueError("1-NNA needs at least two elements")
    return one_nna_from_matrices(distance_matrix(x, x, d, reduction),
                                 distance_matrix(x, y, d, reduction),
                                 distance_matrix(y, y, d, reduction))


def evaluate_sets(gen: Sequence, ref: Sequence, distances=(DistanceKind.CD,),
                  reduction: str = "mean", voxel_res: int = 28) -> Dict[str, float]:
    """All set-level metrics; each distance matrix is computed once."""
    if not len(gen) or not len(ref):
        raise ValueError("metrics need two non-empty sets")
    out = {"JSD": jsd(gen, ref, voxel_res)}
    for d in distances:
        kind = _kind(d)
        dgr = distance_matrix(gen, ref, kind, reduction)
        dgg = distance_matrix(gen, gen, kind, reduction)
        drr = distance_matrix(ref, ref, kind, reduction)
        out[f"COV-{kind.value}"] = coverage_from_matrix(dgr)
        out[f"MMD-{kind.value}"] = mmd_from_matrix(dgr)
        out[f"1-NNA-{kind.value}"] = one_nna_from_matrices(dgg, dgr, drr)
    return out
