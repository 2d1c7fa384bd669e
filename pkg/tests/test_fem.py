import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apic_contact.errors import ElementInversionError, InvalidInputError
from apic_contact.fem import (
    ElasticBody,
    Material,
    TetMesh,
    boundary_faces,
    internal_force,
    lumped_mass,
    mechanical_acceleration,
    neo_hookean_energy_density,
    neo_hookean_stress,
    strain_energy,
)
from apic_contact.scenarios import build_block_mesh, rotation_matrix

STEEL = Material(7800.0, 2e11, 0.3)
SOFT = Material(1000.0, 1e6, 0.3)
UNIT_TET = (np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1.0]]), np.array([[0, 1, 2, 3]]))


def test_lame_parameters():
    m = Material(1.0, 2.6, 0.3)
    assert m.shear == pytest.approx(1.0)
    assert m.lame == pytest.approx(1.5)


@pytest.mark.parametrize("args", [(0, 1, 0.3), (1, 0, 0.3), (1, 1, 0.5), (1, 1, -1)])
def test_bad_materials(args):
    with pytest.raises(InvalidInputError):
        Material(*args)


def test_single_tet_lumped_mass():
    X, tets = UNIT_TET
    X = X * 6 ** (1 / 3)  # unit volume
    np.testing.assert_allclose(lumped_mass(TetMesh(X, tets), 4.0), 1.0, rtol=1e-12)


@pytest.mark.parametrize("h", [1.0, 0.5, 0.25])
def test_block_mass_is_density_times_volume(h):
    mesh = build_block_mesh((3.0, 3.0, 3.0), h)
    assert lumped_mass(mesh, 2700.0).sum() == pytest.approx(72900.0, rel=1e-9)


def test_stress_free_reference_and_rotation():
    lam, mu = SOFT.lame, SOFT.shear
    np.testing.assert_allclose(neo_hookean_stress(np.eye(3), lam, mu), 0.0, atol=1e-12)
    R = rotation_matrix((1, 2, 3), 40.0)
    assert abs(neo_hookean_energy_density(R, lam, mu)) < 1e-12 * mu
    assert np.abs(neo_hookean_stress(R, lam, mu)).max() < 1e-12 * mu


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_stress_is_energy_gradient(seed):
    rng = np.random.default_rng(seed)
    F = np.eye(3) + 0.2 * rng.normal(size=(3, 3))
    if np.linalg.det(F) < 0.2:
        return
    lam, mu = 1.7, 0.9
    P = neo_hookean_stress(F, lam, mu)
    eps = 1e-6 * np.linalg.norm(F)
    fd = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            dF = np.zeros((3, 3))
            dF[i, j] = eps
            fd[i, j] = (neo_hookean_energy_density(F + dF, lam, mu) - neo_hookean_energy_density(F - dF, lam, mu)) / (2 * eps)
    np.testing.assert_allclose(P, fd, atol=1e-6 * np.abs(P).max())


def test_inverted_element_reports_its_id():
    with pytest.raises(ElementInversionError):
        neo_hookean_stress(np.diag([1.0, 1.0, -1.0]), 1.0, 1.0)
    mesh = build_block_mesh((1.0, 1.0, 1.0), 1.0)
    body = ElasticBody(mesh, SOFT)
    x = mesh.X.copy()
    x[:, 2] *= -1
    with pytest.raises(ElementInversionError) as info:
        body.internal_force(x)
    assert 0 <= info.value.element < len(mesh.tets)


def test_force_is_energy_gradient(rng):
    mesh = build_block_mesh((1.0, 1.0, 2.0), 0.5)
    body = ElasticBody(mesh, SOFT)
    x = mesh.X + 0.04 * rng.normal(size=mesh.X.shape)
    f = body.internal_force(x)
    eps = 1e-6
    for node in rng.choice(mesh.n_nodes, 8, replace=False):
        for a in range(3):
            xp, xm = x.copy(), x.copy()
            xp[node, a] += eps
            xm[node, a] -= eps
            fd = (body.strain_energy(xp) - body.strain_energy(xm)) / (2 * eps)
            assert abs(fd - f[node, a]) < 1e-6 * np.abs(f).max()


def test_kernel_matches_vectorised_assembly(rng):
    mesh = build_block_mesh((2.0, 1.0, 1.0), 0.5)
    body = ElasticBody(mesh, SOFT)
    x = mesh.X + 0.03 * rng.normal(size=mesh.X.shape)
    np.testing.assert_allclose(body.internal_force(x), body.internal_force_reference(x), rtol=1e-12,
                               atol=1e-12 * np.abs(body.internal_force(x)).max())


def test_free_body_forces_are_balanced(rng):
    mesh = build_block_mesh((1.0, 2.0, 1.0), 0.5)
    body = ElasticBody(mesh, SOFT)
    x = mesh.X + 0.05 * rng.normal(size=mesh.X.shape)
    f = body.internal_force(x)
    scale = np.abs(f).sum()
    assert np.abs(f.sum(axis=0)).max() < 1e-10 * scale
    assert np.abs(np.cross(x, f).sum(axis=0)).max() < 1e-10 * scale * np.abs(x).max()


def test_rigid_motion_gives_no_force():
    mesh = build_block_mesh((1.0, 1.0, 1.0), 0.5)
    x = mesh.X @ rotation_matrix((0, 1, 1), 70.0).T + [5.0, -2.0, 1.0]
    f = internal_force(mesh, SOFT, x)
    assert np.abs(f).max() < 1e-10 * SOFT.youngs
    assert abs(strain_energy(mesh, SOFT, x)) < 1e-10 * SOFT.youngs


def test_small_uniaxial_strain_energy():
    mesh = build_block_mesh((1.0, 1.0, 1.0), 0.5)
    eps = 1e-5
    x = mesh.X * [1 + eps, 1, 1]
    # constrained-lateral (uniaxial strain) modulus is lam + 2 mu
    expect = 0.5 * (SOFT.lame + 2 * SOFT.shear) * eps**2
    assert strain_energy(mesh, SOFT, x) == pytest.approx(expect, rel=1e-4)


def test_traction_on_single_tet_face():
    X, tets = UNIT_TET
    mesh = TetMesh(X, tets)
    eps = 1e-6
    f = internal_force(mesh, SOFT, X * [1 + eps, 1, 1])
    # sigma_xx = (lam + 2 mu) eps acts on the face opposite node 1 (area 1/2);
    # one-point assembly hands node 1 a third of that face's load
    load = (SOFT.lame + 2 * SOFT.shear) * eps * 0.5 / 3
    assert f[1, 0] == pytest.approx(load, rel=1e-4)
    assert f[[0, 2, 3], 0].sum() == pytest.approx(-load, rel=1e-4)
    assert abs(f[1, 1]) < 1e-6 * load and abs(f[1, 2]) < 1e-6 * load


def test_mechanical_acceleration_free_fall_and_fixed():
    mesh = build_block_mesh((1.0, 1.0, 1.0), 0.5)
    body = ElasticBody(mesh, SOFT)
    g = [0.0, 0.0, -9.81]
    a = mechanical_acceleration(body, mesh.X, g, fixed=[0, 1])
    np.testing.assert_allclose(a[2:], np.tile(g, (mesh.n_nodes - 2, 1)))
    assert not a[:2].any()


def test_mesh_counts_and_volume():
    one = build_block_mesh((1.0, 1.0, 1.0), 1.0)
    assert one.n_nodes == 8 and len(one.tets) == 6
    three = build_block_mesh((3.0, 3.0, 3.0), 1.0)
    assert len(three.tets) == 162
    odd = build_block_mesh((1.0, 1.5, 0.25), 1.0 / 3.0, rotation=rotation_matrix((0, 1, 0), 30.0))
    assert odd.volumes().sum() == pytest.approx(0.375, rel=1e-12)


def test_boundary_faces_are_outward_and_closed():
    mesh = build_block_mesh((2.0, 1.0, 1.0), 0.5)
    faces = boundary_faces(mesh.tets)
    a, b, c = (mesh.X[faces[:, i]] for i in range(3))
    # divergence theorem: sum over faces of centroid . area normal = 3 * volume
    flux = np.einsum("fa,fa->", (a + b + c) / 3, 0.5 * np.cross(b - a, c - a))
    assert flux == pytest.approx(3 * 2.0, rel=1e-12)
    assert len(faces) == 2 * (2 * 4 * 2 + 2 * 4 * 2 + 2 * 2 * 2)


def test_material_count_must_match_bodies():
    mesh = TetMesh.merge([build_block_mesh((1, 1, 1), 1.0), build_block_mesh((1, 1, 1), 1.0, translation=(3, 0, 0))])
    with pytest.raises(InvalidInputError):
        ElasticBody(mesh, SOFT)
    assert len(ElasticBody(mesh, [SOFT, STEEL]).mass) == 16


def test_inverted_reference_mesh_rejected():
    X, tets = UNIT_TET
    with pytest.raises(InvalidInputError):
        TetMesh(X, tets[:, [0, 2, 1, 3]])
