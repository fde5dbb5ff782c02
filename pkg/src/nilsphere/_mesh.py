"""Icosphere vertex meshes used for sup-norm sampling and seeding.

Subdivision keeps every coarser vertex, so per-vertex maxima are
nondecreasing in the level.  Meshes are cached per level.
"""

from functools import lru_cache

import numpy as np

# z-axis-aligned icosahedron (poles included), unit vertices
_T = 0.4472135954999579  # 1/sqrt(5)
_BASE_VERTICES = [(0.0, 0.0, 1.0), (0.0, 0.0, -1.0)]
for _i in range(5):
    _phi = 2.0 * np.pi * _i / 5.0
    _BASE_VERTICES.append(
        (np.sqrt(1 - _T * _T) * np.cos(_phi), np.sqrt(1 - _T * _T) * np.sin(_phi), _T)
    )
for _i in range(5):
    _phi = 2.0 * np.pi * (_i + 0.5) / 5.0
    _BASE_VERTICES.append(
        (np.sqrt(1 - _T * _T) * np.cos(_phi), np.sqrt(1 - _T * _T) * np.sin(_phi), -_T)
    )

_BASE_FACES = [
    (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 5, 6), (0, 6, 2),
    (1, 8, 7), (1, 9, 8), (1, 10, 9), (1, 11, 10), (1, 7, 11),
    (2, 7, 3), (3, 7, 8), (3, 8, 4), (4, 8, 9), (4, 9, 5),
    (5, 9, 10), (5, 10, 6), (6, 10, 11), (6, 11, 2), (2, 11, 7),
]


def _subdivide(verts, faces):
    verts = list(verts)
    midpoint = {}

    def mid(a, b):
        key = (a, b) if a < b else (b, a)
        if key not in midpoint:
            v = np.asarray(verts[a]) + np.asarray(verts[b])
            v = v / np.linalg.norm(v)
            verts.append(tuple(v))
            midpoint[key] = len(verts) - 1
        return midpoint[key]

    out = []
    for (a, b, c) in faces:
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        out.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])
    return verts, out


@lru_cache(maxsize=None)
def _mesh(level):
    verts, faces = list(_BASE_VERTICES), list(_BASE_FACES)
    for _ in range(level):
        verts, faces = _subdivide(verts, faces)
    arr = np.array(verts, dtype=float)
    arr /= np.linalg.norm(arr, axis=1)[:, None]
    arr.flags.writeable = False
    return arr


def icosphere_vertices(level):
    """Unit vertices of the level-times subdivided icosahedron, (10*4^L+2, 3)."""
    if level < 0:
        raise ValueError("mesh level must be >= 0")
    return _mesh(int(level))


def mesh_spacing(level):
    """Typical edge length (radians) at the given subdivision level."""
    return 1.1071487177940904 / (2 ** level)  # icosahedron edge arc / 2^L
