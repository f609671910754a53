#!/usr/bin/env python3
"""Generate the unstructured unit-square sample mesh.

Boundary nodes are equispaced (12, 12, 12 and 11 segments per side), interior
nodes come from seeded dart throwing, and the triangulation is Delaunay.
With 47 boundary and 222 interior nodes that gives 2*269 - 47 - 2 = 489
triangles.

    python3 tools/gen_unstructured_mesh.py > crates/core/data/unit_square_unstructured.msh
"""

import sys

import numpy as np
from scipy.spatial import Delaunay

SEED = 20240517
INTERIOR = 222
MIN_DIST = 0.045
WALL_DIST = 0.035


def boundary():
    pts = []
    for k in range(12):
        pts.append((k / 12, 0.0))
    for k in range(12):
        pts.append((1.0, k / 12))
    for k in range(12):
        pts.append((1.0 - k / 12, 1.0))
    for k in range(11):
        pts.append((0.0, 1.0 - k / 11))
    return pts


def interior(rng, existing):
    pts = []
    allpts = list(existing)
    tries = 0
    dist = MIN_DIST
    while len(pts) < INTERIOR:
        tries += 1
        if tries % 20000 == 0:
            dist *= 0.97
        p = rng.uniform(WALL_DIST, 1.0 - WALL_DIST, size=2)
        arr = np.asarray(allpts)
        if np.min(np.hypot(arr[:, 0] - p[0], arr[:, 1] - p[1])) < dist:
            continue
        pts.append((p[0], p[1]))
        allpts.append((p[0], p[1]))
    return pts


def main():
    rng = np.random.default_rng(SEED)
    b = boundary()
    nodes = np.asarray(b + interior(rng, b))
    tri = Delaunay(nodes).simplices
    out = []
    for t in tri:
        a, bb, c = (nodes[i] for i in t)
        area2 = (bb[0] - a[0]) * (c[1] - a[1]) - (bb[1] - a[1]) * (c[0] - a[0])
        if abs(area2) < 1e-12:
            sys.exit("degenerate triangle")
        out.append(t if area2 > 0 else t[[0, 2, 1]])
    w = sys.stdout.write
    w("# unstructured Delaunay mesh of the unit square\n")
    w(f"# generated by tools/gen_unstructured_mesh.py (seed {SEED})\n")
    w(f"{len(nodes)} {len(out)}\n")
    for x, y in nodes:
        w(f"{x:.17g} {y:.17g}\n")
    for t in out:
        w(f"{t[0]} {t[1]} {t[2]}\n")


if __name__ == "__main__":
    main()
