import io

import numpy as np
import pytest

from surfgauge import dec
from surfgauge.mesh import (
    MeshError,
    build_surface,
    prolong_edge,
    prolong_face,
    prolong_vertex,
    read_off,
    refine,
    restrict_edge,
    restrict_face,
    restrict_vertex,
    write_off,
)


def test_euler_characteristic():
    assert build_surface(1, 0).euler_characteristic == 0
    assert build_surface(2, 0).euler_characteristic == -2
    m = build_surface(2, 2)  # recount cells after two 1->4 subdivisions
    assert (m.nv, m.ne, m.nf) == (126, 384, 256)
    assert m.nv - m.ne + m.nf == -2


def test_rejects_bad_input():
    with pytest.raises(MeshError):
        build_surface(0, 0)
    with pytest.raises(MeshError):
        build_surface(1, -1)
    with pytest.raises(MeshError):
        build_surface(2, 9)  # refinement overflow


def test_areas_uniform_and_total_volume():
    m = build_surface(2, 1)
    assert np.allclose(m.areas, 1.0 / m.nf)
    assert abs(m.total_volume - 1.0) < 1e-14
    m.validate()


def test_every_edge_two_faces_opposite():
    m = build_surface(2, 1)
    signs = {}
    for f in range(m.nf):
        for i in range(3):
            signs.setdefault(m.face_edges[f, i], []).append(m.face_signs[f, i])
    assert all(sorted(v) == [-1, 1] for v in signs.values())


def test_off_roundtrip_torus(tmp_path):
    m = build_surface(1, 1)
    path = tmp_path / "torus.off"
    write_off(m, str(path))
    m2 = read_off(str(path))
    assert m2.genus == 1
    assert (m2.nv, m2.ne, m2.nf) == (m.nv, m.ne, m.nf)
    assert np.array_equal(m2.faces, m.faces)
    # second write is byte-identical
    path2 = tmp_path / "torus2.off"
    write_off(m2, str(path2))
    write_off(m2, str(tmp_path / "torus3.off"))
    assert (tmp_path / "torus2.off").read_bytes() == (tmp_path / "torus3.off").read_bytes()


def test_off_rejects_higher_genus_builtin(tmp_path):
    m = build_surface(2, 0)
    with pytest.raises(MeshError):
        write_off(m, str(tmp_path / "g2.off"))


def test_off_rejects_garbage():
    with pytest.raises(MeshError):
        read_off(io.StringIO("PLY\n"))


TETRA_OFF = """OFF
4 4 6
0.0 0.0 0.0
1.0 0.0 0.0
0.5 0.8660254037844386 0.0
0.5 0.28867513459481287 0.816496580927726
3 0 2 1
3 0 1 3
3 1 2 3
3 0 3 2
"""


def test_off_external_sphere_mesh():
    """OFF meshes have non-parallel charts: the general unfolding path."""
    m = read_off(io.StringIO(TETRA_OFF))
    assert m.genus == 0
    assert m.euler_characteristic == 2
    # Gauss-Bonnet with the reference structure on arbitrary charts
    J = dec.reference_J(m)
    total = dec.ip0(m, dec.scalar_curvature(m, J), np.ones(m.nv))
    assert abs(total - 8 * np.pi) < 1e-10
    # unfolding transitions are isometries matching the shared edges
    for f in range(m.nf):
        for g, rot, t in m.unfold_maps[f]:
            assert abs(np.linalg.det(rot) - 1.0) < 1e-12
    # whitney of exact cochains is still the affine gradient
    rng = np.random.default_rng(0)
    u = rng.standard_normal(m.nv)
    grad = dec.whitney(m, dec.coboundary(m, u, 0))
    pc = m.corners[0]
    vals = u[m.faces[0]]
    mat = np.stack([pc[1] - pc[0], pc[2] - pc[0]])
    assert np.abs(grad[0] - np.linalg.solve(mat, vals[1:] - vals[0])).max() < 1e-12


def test_prolong_restrict_inverse():
    coarse = build_surface(2, 0)
    fine = refine(coarse)
    rng = np.random.default_rng(0)
    u = rng.standard_normal(coarse.nv)
    assert np.allclose(restrict_vertex(coarse, fine, prolong_vertex(coarse, fine, u)), u)
    w = rng.standard_normal((coarse.ne, 3))
    assert np.abs(restrict_edge(coarse, fine, prolong_edge(coarse, fine, w)) - w).max() < 1e-12
    j = rng.standard_normal((coarse.nf, 2, 2))
    assert np.allclose(restrict_face(coarse, fine, prolong_face(coarse, fine, j)), j)


def test_prolong_edge_represents_same_form():
    # the Whitney form of the prolonged cochain has the same pairing with
    # prolonged constant data up to interpolation error
    coarse = build_surface(1, 1)
    fine = refine(coarse)
    rng = np.random.default_rng(1)
    w = rng.standard_normal(coarse.ne)
    wf = prolong_edge(coarse, fine, w)
    # total circulation along parent faces is preserved exactly
    dc = dec.coboundary(coarse, w, 1)
    df = dec.coboundary(fine, wf, 1)
    df_sum = df.reshape(coarse.nf, 4).sum(axis=1)
    assert np.abs(df_sum - dc).max() < 1e-12
