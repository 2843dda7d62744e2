"""Frequency-adaptive mesh budgets and vertex-clustering decimation.

The element size a surface solve can afford is bounded by the wavelength:
l(f) = c/(f*K) with K elements per wavelength.  A per-frequency plan
turns that into element counts N(f) = ceil(2*area/l^2) and a speedup
estimate against solving every frequency on the finest mesh; the
decimator realizes a budget by snapping vertices to a uniform grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Medium
from .errors import InvalidArgument, ParseError


@dataclass(eq=False)
class SurfaceMesh:
    """Triangle mesh: (m, 3) float vertices, (t, 3) int vertex indices."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        t = np.asarray(self.triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise InvalidArgument("vertices must be an (m, 3) array")
        if not np.all(np.isfinite(v)):
            raise InvalidArgument("vertices must be finite")
        if t.size == 0:
            t = t.reshape(0, 3)
        if t.ndim != 2 or t.shape[1] != 3:
            raise InvalidArgument("triangles must be a (t, 3) index array")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise InvalidArgument("triangle indices out of range")
        if t.size:
            if np.any(t[:, 0] == t[:, 1]) or np.any(t[:, 1] == t[:, 2]) \
                    or np.any(t[:, 0] == t[:, 2]):
                raise InvalidArgument("triangles must use three distinct vertices")
            if np.any(_double_areas(v, t) == 0.0):
                raise InvalidArgument("zero-area triangles are not allowed")
        self.vertices = v
        self.triangles = t

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)

    def area(self) -> float:
        """Total surface area in m^2."""
        if not len(self.triangles):
            return 0.0
        return float(_double_areas(self.vertices, self.triangles).sum() / 2.0)

    def edges(self) -> np.ndarray:
        """Unique undirected edges as an (e, 2) index array."""
        t = self.triangles
        pairs = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        return np.unique(np.sort(pairs, axis=1), axis=0)

    def mean_edge_length(self) -> float:
        e = self.edges()
        if not len(e):
            return 0.0
        d = self.vertices[e[:, 0]] - self.vertices[e[:, 1]]
        return float(np.linalg.norm(d, axis=1).mean())

    def bounding_diagonal(self) -> float:
        if not len(self.vertices):
            return 0.0
        span = self.vertices.max(axis=0) - self.vertices.min(axis=0)
        return float(np.linalg.norm(span))


def _double_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    a = vertices[triangles[:, 0]]
    cross = np.cross(vertices[triangles[:, 1]] - a, vertices[triangles[:, 2]] - a)
    return np.linalg.norm(cross, axis=1)


# ---------------------------------------------------------------------------
# OFF mesh files


def parse_off(text: str) -> SurfaceMesh:
    """Parse an ASCII OFF mesh; polygons are fan-triangulated."""
    lines = text.splitlines()
    content = [(i + 1, ln.strip()) for i, ln in enumerate(lines)
               if ln.strip() and not ln.lstrip().startswith("#")]
    if not content:
        raise ParseError("empty OFF document", line=1, column=1)
    lineno, header = content[0]
    if header != "OFF":
        raise ParseError("missing OFF header", line=lineno, column=1)
    if len(content) < 2:
        raise ParseError("missing element counts", line=lineno, column=1)
    lineno, counts = content[1]
    parts = counts.split()
    if len(parts) != 3:
        raise ParseError("counts line must hold 3 integers", line=lineno, column=1)
    try:
        n_vertices, n_faces = int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError("counts must be integers", line=lineno, column=1) from None
    rows = content[2:]
    if len(rows) < n_vertices + n_faces:
        raise ParseError(
            f"expected {n_vertices} vertex and {n_faces} face lines, "
            f"found {len(rows)}", line=lineno, column=1)
    vertices = np.empty((n_vertices, 3))
    for i in range(n_vertices):
        lineno, row = rows[i]
        fields = row.split()
        if len(fields) != 3:
            raise ParseError("vertex line must hold 3 coordinates",
                             line=lineno, column=1)
        try:
            vertices[i] = [float(x) for x in fields]
        except ValueError:
            raise ParseError("vertex coordinates must be numbers",
                             line=lineno, column=1) from None
    triangles = []
    for i in range(n_vertices, n_vertices + n_faces):
        lineno, row = rows[i]
        fields = row.split()
        try:
            values = [int(x) for x in fields]
        except ValueError:
            raise ParseError("face line must hold integers",
                             line=lineno, column=1) from None
        if not values or values[0] < 3 or len(values) != values[0] + 1:
            raise ParseError("face line must be: count followed by that many "
                             "indices, count >= 3", line=lineno, column=1)
        idx = values[1:]
        for k in range(1, len(idx) - 1):
            triangles.append((idx[0], idx[k], idx[k + 1]))
    try:
        return SurfaceMesh(vertices, np.array(triangles, dtype=np.int64))
    except InvalidArgument as exc:
        raise ParseError(str(exc), line=1, column=1) from None


def format_off(mesh: SurfaceMesh) -> str:
    out = ["OFF", f"{mesh.vertex_count} {mesh.triangle_count} 0"]
    for x, y, z in mesh.vertices:
        # repr of a Python float is the shortest exact decimal form.
        out.append(f"{float(x)!r} {float(y)!r} {float(z)!r}")
    for a, b, c in mesh.triangles:
        out.append(f"3 {a} {b} {c}")
    return "\n".join(out) + "\n"


def read_off(path) -> SurfaceMesh:
    with open(path, "r", encoding="ascii") as fh:
        return parse_off(fh.read())


def write_off(path, mesh: SurfaceMesh) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_off(mesh))


# ---------------------------------------------------------------------------
# Budgets and decimation


def target_edge_length(frequency: float, medium: Medium = Medium(),
                       elements_per_wavelength: float = 6.0) -> float:
    """Wavelength-bounded element size, l(f) = c/(f*K)."""
    if frequency <= 0:
        raise InvalidArgument("frequency must be positive")
    if elements_per_wavelength < 2:
        raise InvalidArgument("need at least 2 elements per wavelength")
    return medium.sound_speed / (frequency * elements_per_wavelength)


def _cluster_once(mesh: SurfaceMesh, cell: float) -> SurfaceMesh:
    anchor = mesh.vertices.min(axis=0)
    keys = np.floor((mesh.vertices - anchor) / cell).astype(np.int64)
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    n_clusters = int(inverse.max()) + 1
    sums = np.zeros((n_clusters, 3))
    np.add.at(sums, inverse, mesh.vertices)
    counts = np.bincount(inverse, minlength=n_clusters).astype(float)
    representatives = sums / counts[:, None]

    tris = inverse[mesh.triangles]
    distinct = (tris[:, 0] != tris[:, 1]) & (tris[:, 1] != tris[:, 2]) \
        & (tris[:, 0] != tris[:, 2])
    tris = tris[distinct]
    if len(tris):
        # drop repeated triangles regardless of winding, keep first seen
        sorted_key = np.sort(tris, axis=1)
        _, first = np.unique(sorted_key, axis=0, return_index=True)
        tris = tris[np.sort(first)]
        tris = tris[_double_areas(representatives, tris) > 0.0]
    return SurfaceMesh(representatives, tris)


def cluster_decimate(mesh: SurfaceMesh, cell: float) -> SurfaceMesh:
    """Snap vertices to a uniform grid of the given cell size.

    Vertices share a cluster when they fall in the same grid cell (the
    lattice is anchored at the bounding-box minimum, so a mesh smaller
    than one cell collapses to a point); clusters are replaced by their
    centroids and triangles that collapse, degenerate, or duplicate an
    earlier one are dropped.  Passes repeat until the vertex count is
    stable; once every cluster is a singleton the centroids are the
    vertices themselves, which makes the result an exact fixed point.
    """
    if cell <= 0:
        raise InvalidArgument("cell size must be positive")
    if not mesh.vertex_count or not mesh.triangle_count:
        raise InvalidArgument("cannot decimate an empty mesh")
    current = mesh
    while True:
        reduced = _cluster_once(current, cell)
        if reduced.vertex_count == current.vertex_count \
                or not reduced.triangle_count:
            return reduced
        current = reduced


@dataclass(frozen=True)
class PlanRow:
    frequency_hz: float
    target_edge_length_m: float
    element_count: int


@dataclass(frozen=True)
class SimplificationPlan:
    rows: tuple
    naive_cost: float
    adaptive_cost: float
    speedup: float
    cost_exponent: float


def plan(frequencies, mesh_or_area, medium: Medium = Medium(),
         elements_per_wavelength: float = 6.0,
         cost_exponent: float = 3.0) -> SimplificationPlan:
    """Per-frequency element budgets plus the adaptive-vs-naive speedup.

    N(f) = ceil(2*area/l(f)^2); adaptive cost sums N^e over the list while
    the naive baseline pays max(N)^e for every frequency.
    """
    freqs = [float(f) for f in frequencies]
    if not freqs:
        raise InvalidArgument("need at least one frequency")
    if any(f <= 0 for f in freqs):
        raise InvalidArgument("frequencies must be positive")
    if cost_exponent <= 0:
        raise InvalidArgument("cost exponent must be positive")
    if isinstance(mesh_or_area, SurfaceMesh):
        area = mesh_or_area.area()
    else:
        area = float(mesh_or_area)
    if area <= 0:
        raise InvalidArgument("surface area must be positive")
    rows = []
    for f in freqs:
        edge = target_edge_length(f, medium, elements_per_wavelength)
        count = int(math.ceil(2.0 * area / (edge * edge)))
        rows.append(PlanRow(f, edge, count))
    adaptive = float(sum(r.element_count ** cost_exponent for r in rows))
    peak = max(r.element_count for r in rows)
    naive = float(len(rows) * peak ** cost_exponent)
    return SimplificationPlan(tuple(rows), naive, adaptive, naive / adaptive,
                              cost_exponent)
