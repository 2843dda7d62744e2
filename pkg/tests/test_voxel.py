"""Voxelization and STL export: frozen byte-level oracles and geometry checks."""

import math
from collections import Counter

import numpy as np
import pytest

from acouforge.design import (
    FilterDesign,
    HelmholtzBranch,
    QuarterWaveBranch,
    Tube,
    demo_design,
)
from acouforge.errors import (
    InvalidArgument,
    NothingToExport,
    ValidationFailed,
    VoxelizationTooCoarse,
)
from acouforge.voxel import (
    STL_TRIANGLE,
    VoxelGrid,
    export_stl,
    read_stl,
    stl_signed_volume,
    voxelize,
)


def single_cell_grid(cell=0.01) -> VoxelGrid:
    occ = np.zeros((1, 1, 1), dtype=bool)
    occ[0, 0, 0] = True
    return VoxelGrid(occ, cell, (0.0, 0.0, 0.0))


def edge_pairing_is_watertight(vertices: np.ndarray, cell: float) -> bool:
    """Each directed edge must appear exactly once, with its reverse present."""
    edges = Counter()
    for tri in vertices:
        for i in range(3):
            a = tuple(np.round(tri[i] / cell * 2).astype(int))
            b = tuple(np.round(tri[(i + 1) % 3] / cell * 2).astype(int))
            edges[(a, b)] += 1
    return all(c == 1 for c in edges.values()) and \
        all((b, a) in edges for (a, b) in edges)


class TestStlOracle:
    def test_record_layout_is_50_bytes(self):
        assert STL_TRIANGLE.itemsize == 50

    def test_single_cell_one_layer(self):
        # 3x3x3 dilated block minus the air cell: 54 outer + 6 inner faces
        # = 60 quads = 120 triangles = 84 + 120*50 = 6084 bytes.
        cell = 0.01
        data = export_stl(single_cell_grid(cell), wall_thickness=cell)
        assert len(data) == 6084
        normals, vertices = read_stl(data)
        assert vertices.shape == (120, 3, 3)
        assert stl_signed_volume(data) == pytest.approx(26 * cell**3, rel=1e-5)
        assert edge_pairing_is_watertight(vertices, cell)

    def test_single_cell_two_layers(self):
        # 5x5x5 block: 6*25 outer + 6 inner = 156 quads = 312 triangles.
        cell = 0.01
        data = export_stl(single_cell_grid(cell), wall_thickness=2 * cell)
        assert len(data) == 84 + 312 * 50
        assert stl_signed_volume(data) == pytest.approx(124 * cell**3, rel=1e-5)

    def test_wall_thickness_rounds_to_layers(self):
        cell = 0.01
        one = export_stl(single_cell_grid(cell), wall_thickness=1.4 * cell)
        two = export_stl(single_cell_grid(cell), wall_thickness=1.6 * cell)
        assert len(one) == 6084
        assert len(two) == 84 + 312 * 50

    def test_normals_match_winding(self):
        data = export_stl(single_cell_grid(), wall_thickness=0.01)
        normals, vertices = read_stl(data)
        face = np.cross(vertices[:, 1] - vertices[:, 0],
                        vertices[:, 2] - vertices[:, 0])
        face /= np.linalg.norm(face, axis=1, keepdims=True)
        assert np.allclose(face, normals, atol=1e-6)

    def test_export_errors(self):
        empty = VoxelGrid(np.zeros((2, 2, 2), dtype=bool), 0.01, (0, 0, 0))
        with pytest.raises(NothingToExport):
            export_stl(empty, 0.01)
        with pytest.raises(InvalidArgument):
            export_stl(single_cell_grid(0.01), wall_thickness=0.004)

    def test_read_stl_rejects_truncated(self):
        data = export_stl(single_cell_grid(), 0.01)
        with pytest.raises(InvalidArgument):
            read_stl(data[:-7])
        with pytest.raises(InvalidArgument):
            read_stl(data[:50])


class TestVoxelize:
    def test_demo_volume_within_10_percent(self):
        d = demo_design()
        analytic = math.pi * (0.02**2 * 0.05 + 0.04**2 * 0.1 + 0.02**2 * 0.05)
        g = voxelize(d, cell_size=0.02 / 4)
        assert g.volume() == pytest.approx(analytic, rel=0.10)

    def test_volume_error_under_10_percent_for_random_chains(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = int(rng.integers(1, 5))
            chain = tuple(
                Tube(float(rng.uniform(0.03, 0.2)), float(rng.uniform(0.008, 0.03)))
                for _ in range(n))
            d = FilterDesign("rand", 0.02, chain=chain)
            r_min = min(t.radius for t in chain)
            g = voxelize(d, cell_size=r_min / 4)
            analytic = sum(math.pi * t.radius**2 * t.length for t in chain)
            assert g.volume() == pytest.approx(analytic, rel=0.10)

    def test_six_connected_with_branches(self):
        d = FilterDesign(
            "b", 0.02, chain=(Tube(0.1, 0.02), Tube(0.1, 0.02)),
            branches=(
                QuarterWaveBranch(0.08, 0.008, attach_after=0),
                QuarterWaveBranch(0.06, 0.008, attach_after=1),
                HelmholtzBranch(0.01, 0.006, 1e-4, attach_after=2),
            ),
        )
        g = voxelize(d, cell_size=0.002)
        assert g.is_six_connected()
        # the helmholtz cavity cube adds volume well above the bare chain
        assert g.volume() > math.pi * 0.02**2 * 0.2

    def test_metadata_and_name_do_not_change_grid(self):
        base = demo_design()
        renamed = FilterDesign("other", base.port_radius, base.chain,
                               base.branches, base.medium, {"note": "x"})
        assert voxelize(base, 0.005) == voxelize(renamed, 0.005)

    def test_grid_inequality_on_geometry_change(self):
        a = FilterDesign("a", 0.02, chain=(Tube(0.1, 0.02),))
        b = FilterDesign("a", 0.02, chain=(Tube(0.12, 0.02),))
        assert voxelize(a, 0.005) != voxelize(b, 0.005)

    def test_too_coarse_rejected(self):
        d = demo_design()  # narrowest radius 0.02
        with pytest.raises(VoxelizationTooCoarse):
            voxelize(d, cell_size=0.021)
        with pytest.raises(InvalidArgument):
            voxelize(d, cell_size=0.0)

    def test_invalid_design_rejected(self):
        d = FilterDesign("bad", 0.02, chain=(Tube(-0.1, 0.02),))
        with pytest.raises(ValidationFailed):
            voxelize(d, cell_size=0.005)

    def test_cell_centers(self):
        g = single_cell_grid(0.01)
        centers = g.cell_centers(g.occupied_indices())
        assert centers.shape == (1, 3)
        assert np.allclose(centers[0], [0.005, 0.005, 0.005])

    def test_chain_spans_expected_extent(self):
        d = FilterDesign("t", 0.02, chain=(Tube(0.1, 0.01),))
        g = voxelize(d, 0.0025)
        assert g.occupancy.shape[0] == 40  # 0.1 / 0.0025
        occupied_x = np.unique(g.occupied_indices()[:, 0])
        assert occupied_x[0] == 0 and occupied_x[-1] == 39

    def test_branched_design_stl_is_printable(self):
        d = FilterDesign(
            "tag", 0.02, chain=(Tube(0.05, 0.02), Tube(0.05, 0.02)),
            branches=(QuarterWaveBranch(0.05, 0.008, attach_after=1),),
        )
        g = voxelize(d, cell_size=0.004)
        data = export_stl(g, wall_thickness=0.008)
        assert stl_signed_volume(data) > 0
        _, vertices = read_stl(data)
        assert edge_pairing_is_watertight(vertices, 0.004)
