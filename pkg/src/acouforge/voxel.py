"""Voxelization of designs and watertight STL shell export.

The voxel grid samples the design's interior air volume: the chain is laid
out along +x (inlet at x = 0), branches rise along +y from their attachment
abscissa, and a cell is occupied when its centre falls inside any solid.
``export_stl`` turns the air volume into a printable shell by dilating it
and emitting the boundary faces of dilated-minus-air, so the original cavity
survives as the hollow interior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .design import (
    FilterDesign,
    HelmholtzBranch,
    QuarterWaveBranch,
    validate,
)
from .errors import (
    InvalidArgument,
    NothingToExport,
    ParseError,
    ValidationFailed,
    VoxelizationTooCoarse,
)

STL_HEADER_BYTES = 80
STL_TRIANGLE = np.dtype([
    ("normal", "<f4", (3,)),
    ("v0", "<f4", (3,)),
    ("v1", "<f4", (3,)),
    ("v2", "<f4", (3,)),
    ("attr", "<u2"),
])

SIX_CONNECTED = ndimage.generate_binary_structure(3, 1)


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """Boolean occupancy over a regular grid of cubic cells.

    origin is the world position of the grid's minimum corner; the centre of
    cell (i, j, k) is origin + (i + 0.5, j + 0.5, k + 0.5) * cell_size.
    """

    occupancy: np.ndarray
    cell_size: float
    origin: tuple

    def __post_init__(self):
        if self.occupancy.ndim != 3 or self.occupancy.dtype != bool:
            raise InvalidArgument("occupancy must be a 3-D boolean array")
        if not self.cell_size > 0:
            raise InvalidArgument("cell_size must be positive")

    def __eq__(self, other):
        if not isinstance(other, VoxelGrid):
            return NotImplemented
        return (
            self.cell_size == other.cell_size
            and self.origin == other.origin
            and self.occupancy.shape == other.occupancy.shape
            and bool(np.array_equal(self.occupancy, other.occupancy))
        )

    @property
    def count(self) -> int:
        return int(self.occupancy.sum())

    def volume(self) -> float:
        """Occupied (air) volume in cubic metres."""
        return self.count * self.cell_size**3

    def occupied_indices(self) -> np.ndarray:
        """(n, 3) integer indices of occupied cells in C order."""
        return np.argwhere(self.occupancy)

    def cell_centers(self, indices: np.ndarray) -> np.ndarray:
        return np.asarray(self.origin) + (indices + 0.5) * self.cell_size

    def is_six_connected(self) -> bool:
        if self.count == 0:
            return False
        _, n_components = ndimage.label(self.occupancy, structure=SIX_CONNECTED)
        return n_components == 1


def _design_solids(design: FilterDesign):
    """Predicate + bounding box per primitive, in world coordinates."""
    solids = []
    x = 0.0
    abscissa = [0.0]
    for prim in design.chain:
        x0, x1, r = x, x + prim.length, prim.radius

        def chain_mask(X, Y, Z, x0=x0, x1=x1, r=r):
            return (X >= x0) & (X <= x1) & (Y**2 + Z**2 <= r * r)

        solids.append((chain_mask, (x0, -r, -r), (x1, r, r)))
        x = x1
        abscissa.append(x)
    for prim in design.branches:
        xb = abscissa[prim.attach_after]
        if isinstance(prim, QuarterWaveBranch):
            r, top = prim.radius, prim.length

            def qw_mask(X, Y, Z, xb=xb, r=r, top=top):
                return (Y >= 0) & (Y <= top) & ((X - xb) ** 2 + Z**2 <= r * r)

            solids.append((qw_mask, (xb - r, 0.0, -r), (xb + r, top, r)))
        else:
            rn, ln = prim.neck_radius, prim.neck_length
            side = prim.cavity_volume ** (1.0 / 3.0)

            def neck_mask(X, Y, Z, xb=xb, rn=rn, ln=ln):
                return (Y >= 0) & (Y <= ln) & ((X - xb) ** 2 + Z**2 <= rn * rn)

            def cavity_mask(X, Y, Z, xb=xb, ln=ln, side=side):
                half = side / 2.0
                return ((np.abs(X - xb) <= half) & (Y >= ln) & (Y <= ln + side)
                        & (np.abs(Z) <= half))

            solids.append((neck_mask, (xb - rn, 0.0, -rn), (xb + rn, ln, rn)))
            solids.append((cavity_mask,
                           (xb - side / 2, ln, -side / 2),
                           (xb + side / 2, ln + side, side / 2)))
    return solids


def _min_feature_radius(design: FilterDesign) -> float:
    radii = [p.radius for p in design.chain]
    for prim in design.branches:
        if isinstance(prim, QuarterWaveBranch):
            radii.append(prim.radius)
        else:
            radii.append(prim.neck_radius)
    return min(radii)


def voxelize(design: FilterDesign, cell_size: float) -> VoxelGrid:
    """Rasterize the design's air volume at the given cubic cell size.

    Cells are included by the centre-inside rule. The cell must not exceed
    the smallest duct radius, which also guarantees the occupied set comes
    out 6-connected (every branch rasterizes at least one cell column into
    its parent).
    """
    violations = validate(design)
    if violations:
        raise ValidationFailed(violations)
    if not cell_size > 0:
        raise InvalidArgument(f"cell_size must be positive, got {cell_size}")
    r_min = _min_feature_radius(design)
    if cell_size > r_min:
        raise VoxelizationTooCoarse(
            f"cell_size {cell_size} exceeds the smallest duct radius {r_min}")
    solids = _design_solids(design)
    los = np.array([lo for _, lo, _ in solids])
    his = np.array([hi for _, _, hi in solids])
    lo = los.min(axis=0)
    hi = his.max(axis=0)
    dims = np.maximum(1, np.ceil((hi - lo) / cell_size - 1e-9)).astype(int)
    axes = [lo[i] + (np.arange(dims[i]) + 0.5) * cell_size for i in range(3)]
    X = axes[0][:, None, None]
    Y = axes[1][None, :, None]
    Z = axes[2][None, None, :]
    occupancy = np.zeros(tuple(dims), dtype=bool)
    for mask, _, _ in solids:
        occupancy |= mask(X, Y, Z)
    return VoxelGrid(occupancy, cell_size, tuple(float(v) for v in lo))


def _boundary_faces(shell: np.ndarray, axis: int, sign: int) -> np.ndarray:
    """Shell cells whose face in the (axis, sign) direction is exposed."""
    neighbor = np.zeros_like(shell)
    src = [slice(None)] * 3
    dst = [slice(None)] * 3
    if sign > 0:
        dst[axis] = slice(None, -1)
        src[axis] = slice(1, None)
    else:
        dst[axis] = slice(1, None)
        src[axis] = slice(None, -1)
    neighbor[tuple(dst)] = shell[tuple(src)]
    return shell & ~neighbor


def export_stl(grid: VoxelGrid, wall_thickness: float) -> bytes:
    """Watertight binary STL of a shell around the occupied air volume.

    The solid is the Chebyshev (26-neighbour) dilation of the air volume by
    round(wall_thickness / cell_size) layers; the emitted surface is the
    boundary of solid-minus-air, so both the outer skin and the interior
    cavity walls appear. Triangles wind outward from the material.
    """
    if grid.count == 0:
        raise NothingToExport("voxel grid has no occupied cells")
    if wall_thickness < grid.cell_size:
        raise InvalidArgument(
            f"wall_thickness {wall_thickness} must be at least one cell "
            f"({grid.cell_size})")
    layers = max(1, round(wall_thickness / grid.cell_size))
    air = np.pad(grid.occupancy, layers)
    solid = ndimage.binary_dilation(air, structure=np.ones((3, 3, 3), dtype=bool),
                                    iterations=layers)
    shell = solid & ~air
    cell = grid.cell_size
    base = np.asarray(grid.origin) - layers * cell

    records = []
    for axis in range(3):
        u, v = (axis + 1) % 3, (axis + 2) % 3  # cyclic, so unit_u x unit_v = +axis
        du = np.zeros(3)
        dv = np.zeros(3)
        du[u] = cell
        dv[v] = cell
        for sign in (+1, -1):
            faces = _boundary_faces(shell, axis, sign)
            idx = np.argwhere(faces)
            if idx.size == 0:
                continue
            corner = base + idx * cell
            if sign > 0:
                corner[:, axis] += cell
            p00 = corner
            p10 = corner + du
            p11 = corner + du + dv
            p01 = corner + dv
            normal = np.zeros(3, dtype=np.float32)
            normal[axis] = sign
            n = idx.shape[0]
            block = np.zeros(2 * n, dtype=STL_TRIANGLE)
            block["normal"] = normal
            if sign > 0:
                block["v0"][:n], block["v1"][:n], block["v2"][:n] = p00, p10, p11
                block["v0"][n:], block["v1"][n:], block["v2"][n:] = p00, p11, p01
            else:
                block["v0"][:n], block["v1"][:n], block["v2"][:n] = p00, p11, p10
                block["v0"][n:], block["v1"][n:], block["v2"][n:] = p00, p01, p11
            records.append(block)

    triangles = np.concatenate(records)
    header = b"acouforge voxel shell".ljust(STL_HEADER_BYTES, b"\0")
    count = np.uint32(triangles.shape[0]).tobytes()
    return header + count + triangles.tobytes()


def read_stl(data: bytes):
    """Parse binary STL bytes into (normals (n,3), vertices (n,3,3))."""
    if len(data) < STL_HEADER_BYTES + 4:
        raise InvalidArgument("not a binary STL: too short")
    count = int(np.frombuffer(data, dtype="<u4", count=1,
                              offset=STL_HEADER_BYTES)[0])
    expected = STL_HEADER_BYTES + 4 + count * STL_TRIANGLE.itemsize
    if len(data) != expected:
        raise InvalidArgument(
            f"binary STL length {len(data)} does not match {count} triangles")
    records = np.frombuffer(data, dtype=STL_TRIANGLE, count=count,
                            offset=STL_HEADER_BYTES + 4)
    vertices = np.stack([records["v0"], records["v1"], records["v2"]], axis=1)
    return records["normal"].astype(float), vertices.astype(float)


def stl_signed_volume(data: bytes) -> float:
    """Signed volume enclosed by the triangle soup (positive if outward)."""
    _, vertices = read_stl(data)
    a = vertices[:, 0, :]
    b = vertices[:, 1, :]
    c = vertices[:, 2, :]
    return float(np.einsum("ij,ij->", a, np.cross(b, c)) / 6.0)


# ---------------------------------------------------------------------------
# Document serialization (format_version 1)


def grid_to_document(grid: VoxelGrid) -> dict:
    return {
        "format_version": 1,
        "cell_size_m": grid.cell_size,
        "origin_m": [float(x) for x in grid.origin],
        "shape": list(grid.occupancy.shape),
        "occupied": [[int(i), int(j), int(k)]
                     for i, j, k in grid.occupied_indices()],
    }


def document_to_grid(doc) -> VoxelGrid:
    if not isinstance(doc, dict):
        raise ParseError("expected an object", path="$")
    doc = dict(doc)
    if doc.pop("format_version", None) != 1:
        raise ParseError("unsupported format_version", path="$.format_version")
    try:
        cell_size = float(doc.pop("cell_size_m"))
        origin = tuple(float(x) for x in doc.pop("origin_m"))
        shape = tuple(int(n) for n in doc.pop("shape"))
        occupied = doc.pop("occupied")
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad voxel grid document: {exc}", path="$") from None
    if doc:
        raise ParseError(f"unknown field {sorted(doc)[0]!r}", path="$")
    if len(origin) != 3 or len(shape) != 3 or any(n < 1 for n in shape):
        raise ParseError("origin_m and shape must hold 3 entries, "
                         "shape positive", path="$")
    occupancy = np.zeros(shape, dtype=bool)
    for row, cell in enumerate(occupied):
        try:
            i, j, k = (int(x) for x in cell)
        except (TypeError, ValueError):
            raise ParseError("occupied cells must be integer triples",
                             path=f"$.occupied[{row}]") from None
        if not (0 <= i < shape[0] and 0 <= j < shape[1] and 0 <= k < shape[2]):
            raise ParseError("occupied cell outside the grid shape",
                             path=f"$.occupied[{row}]")
        occupancy[i, j, k] = True
    try:
        return VoxelGrid(occupancy, cell_size, origin)
    except InvalidArgument as exc:
        raise ParseError(str(exc), path="$") from None
