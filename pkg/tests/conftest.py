"""Shared geometry fixtures."""

import numpy as np
import pytest

from acouforge.meshplan import SurfaceMesh


def build_icosphere(subdivisions: int = 3) -> SurfaceMesh:
    """Unit sphere from repeated midpoint subdivision of an icosahedron."""
    phi = (1 + 5 ** 0.5) / 2
    verts = [(-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
             (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
             (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = [np.asarray(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(subdivisions):
        cache = {}

        def midpoint(a: int, b: int) -> int:
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        faces = [t for f in faces for t in
                 [(f[0], midpoint(f[0], f[1]), midpoint(f[0], f[2])),
                  (f[1], midpoint(f[1], f[2]), midpoint(f[0], f[1])),
                  (f[2], midpoint(f[0], f[2]), midpoint(f[1], f[2])),
                  (midpoint(f[0], f[1]), midpoint(f[1], f[2]),
                   midpoint(f[0], f[2]))]]
    return SurfaceMesh(np.array(verts), np.array(faces, dtype=np.int64))


@pytest.fixture(scope="session")
def icosphere() -> SurfaceMesh:
    return build_icosphere(3)
