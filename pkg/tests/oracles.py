"""Brute-force reference implementations. Deliberately naive: plain loops,
no shared code with the package beyond its data types."""
import itertools
import math

import numpy as np


def segment_triangle(p0, p1, a, b, c, eps=1e-14):
    """Moller-Trumbore on the segment p0->p1. Returns the hit point or None.
    Hits on the triangle boundary count (closed triangle)."""
    d = np.subtract(p1, p0, dtype=float)
    e1 = np.subtract(b, a, dtype=float)
    e2 = np.subtract(c, a, dtype=float)
    h = np.cross(d, e2)
    det = float(np.dot(e1, h))
    if abs(det) < eps:
        return None
    inv = 1.0 / det
    s = np.subtract(p0, a, dtype=float)
    u = inv * float(np.dot(s, h))
    if u < 0 or u > 1:
        return None
    q = np.cross(s, e1)
    v = inv * float(np.dot(d, q))
    if v < 0 or u + v > 1:
        return None
    t = inv * float(np.dot(e2, q))
    if t < 0 or t > 1:
        return None
    return np.asarray(p0, dtype=float) + t * d


def inside_edges(dims):
    X, Y, Z = dims
    for axis in range(3):
        rng = [range(d) if i == axis else range(1, d) for i, d in enumerate(dims)]
        for idx in itertools.product(*rng):
            yield axis, idx


def brute_flags(mesh, dims, shift=(1e-7, 2e-7, 3e-7)):
    """{(axis, index)} of edges hit by any triangle, testing every inside edge
    (shifted by ``shift`` grid units) against every triangle."""
    g = (mesh.vertices + 0.5) * np.asarray(dims, dtype=float)
    tris = [g[t] for t in mesh.triangles]
    hits = set()
    for axis, idx in inside_edges(dims):
        p0 = np.asarray(idx, dtype=float) + shift
        p1 = p0.copy()
        p1[axis] += 1
        for a, b, c in tris:
            if segment_triangle(p0, p1, a, b, c) is not None:
                hits.add((axis, idx))
                break
    return hits


def chamfer_loops(a, b, reduction="sum"):
    def one_way(p, q):
        s = 0.0
        for x in p:
            s += min(sum((xi - yi) ** 2 for xi, yi in zip(x, y)) for y in q)
        return s / len(p) if reduction == "mean" else s
    return one_way(a, b) + one_way(b, a)


def emd_permutations(a, b):
    n = len(a)
    best = math.inf
    for perm in itertools.permutations(range(n)):
        cost = sum(math.dist(a[i], b[perm[i]]) for i in range(n))
        best = min(best, cost)
    return best / n


def jsd_bins(a_set, b_set, res=28):
    def hist(clouds):
        h = {}
        n = 0
        for c in clouds:
            for p in c:
                key = tuple(min(res - 1, max(0, int(math.floor((x + 1) / 2 * res)))) for x in p)
                h[key] = h.get(key, 0) + 1
                n += 1
        return {k: v / n for k, v in h.items()}
    p, q = hist(a_set), hist(b_set)
    total = 0.0
    for k in set(p) | set(q):
        pk, qk = p.get(k, 0.0), q.get(k, 0.0)
        mk = (pk + qk) / 2
        if pk > 0:
            total += 0.5 * pk * math.log(pk / mk)
        if qk > 0:
            total += 0.5 * qk * math.log(qk / mk)
    return total


def coverage_loops(gen, ref, d):
    matched = set()
    for x in gen:
        best, best_j = math.inf, None
        for j, y in enumerate(ref):
            v = d(x, y)
            if v < best:
                best, best_j = v, j
        matched.add(best_j)
    return len(matched) / len(ref)


def mmd_loops(gen, ref, d):
    return sum(min(d(x, y) for x in gen) for y in ref) / len(ref)


def one_nna_loops(xs, ys, d):
    items = [(c, 0) for c in xs] + [(c, 1) for c in ys]
    correct = 0
    for i, (ci, li) in enumerate(items):
        best = math.inf
        labels = set()
        for j, (cj, lj) in enumerate(items):
            if i == j:
                continue
            v = d(ci, cj)
            if v < best:
                best, labels = v, {lj}
            elif v == best:
                labels.add(lj)
        if labels == {li}:
            correct += 1
    return 100.0 * correct / len(items)
