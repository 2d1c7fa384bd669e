import math

import numpy as np
import pytest

from apic_contact.errors import InvalidInputError
from apic_contact.scenarios import (
    RAMP_DIMS,
    body_centroid,
    build_block_mesh,
    ramp_analytic,
    ramp_scenario,
    ramp_time_for_displacement,
    rotation_matrix,
    two_block_impact,
)
from apic_contact.transfers import PIC


def test_two_block_parameters():
    sc = two_block_impact(0)
    mat = sc.model.body.materials[0]
    assert (mat.density, mat.youngs, mat.poisson) == (2700.0, 1e8, 0.3)
    assert sc.model.dt == 1e-4 and sc.model.grid.h == 2.0
    assert sc.model.contact.tau == sc.model.dt
    assert sc.model.mass.sum() == pytest.approx(2 * 2700 * 27, rel=1e-12)
    assert not sc.state.B.any()


def test_two_block_geometry():
    sc = two_block_impact(-1, mode=PIC, law="sticky")
    assert sc.model.dt == 5e-5 and sc.model.grid.h == 1.0
    c1 = body_centroid(sc.model, sc.state.x, 0)
    c2 = body_centroid(sc.model, sc.state.x, 1)
    np.testing.assert_allclose(c1, 0, atol=1e-12)
    np.testing.assert_allclose(c2, [0, 3.8, 0], atol=1e-12)
    # block 2's edges are turned 22 degrees about x
    X2 = sc.model.mesh.X[sc.model.mesh.body == 1] - c2
    R = rotation_matrix((1, 0, 0), 22.0)
    local = X2 @ R
    np.testing.assert_allclose(np.abs(local).max(axis=0), 1.5, atol=1e-12)
    v = sc.state.v
    np.testing.assert_array_equal(v[sc.model.mesh.body == 1][0], [-15, -35, -15])


def test_unsupported_refinement_level():
    with pytest.raises(InvalidInputError):
        two_block_impact(1)


def test_ramp_parameters():
    sc = ramp_scenario(0.5, mu=0.2)
    assert sc.model.grid.h == 0.25
    assert sc.model.dt == pytest.approx(1.25e-5)
    np.testing.assert_array_equal(sc.model.gravity, [0, 0, -100.0])
    ramp_volume = sc.model.mesh.volumes()[sc.model.mesh.body[sc.model.mesh.tets[:, 0]] == 1].sum()
    assert ramp_volume == pytest.approx(np.prod(RAMP_DIMS))
    # fixed nodes are exactly the ramp's bottom face
    R = rotation_matrix((0, 1, 0), 30.0)
    local = sc.model.mesh.X[sc.model.fixed] @ R
    np.testing.assert_allclose(local[:, 2], -0.25, atol=1e-12)
    assert sc.model.fixed.sum() == 9 * 4


def test_ramp_third_mesh_size():
    sc = ramp_scenario(0.33, mu=0.2)
    assert sc.params["h"] == 1.0 / 3.0


def test_block_rests_on_ramp_surface():
    sc = ramp_scenario(0.5, mu=0.2)
    R = rotation_matrix((0, 1, 0), 30.0)
    local = sc.model.mesh.X @ R
    block = sc.model.mesh.body == 0
    assert local[block, 2].min() == pytest.approx(0.0, abs=1e-12)
    assert local[~block, 2].max() == pytest.approx(0.0, abs=1e-12)


def test_ramp_descends_in_plus_x():
    R = rotation_matrix((0, 1, 0), 30.0)
    down = R @ [1.0, 0, 0]
    assert down[0] > 0 and down[2] < 0


def test_ramp_analytic_values():
    assert ramp_analytic(1.0, 30.0, 0.2, 100.0) == pytest.approx(14.1506, abs=1e-4)
    assert ramp_analytic(1.0, 30.0, 0.0, 100.0) == pytest.approx(21.6506, abs=1e-4)
    assert ramp_analytic(1.0, 30.0, math.tan(math.radians(30.0)), 100.0) == pytest.approx(0.0, abs=1e-12)
    t = np.linspace(0, 1, 11)
    assert np.all(np.diff(ramp_analytic(t)) > 0)
    assert ramp_analytic(0.5, mu=0.1) > ramp_analytic(0.5, mu=0.3)


def test_time_for_displacement_inverts_analytic():
    for mu in (0.1, 0.2, 0.3):
        t = ramp_time_for_displacement(1.0, mu=mu)
        assert ramp_analytic(t, mu=mu) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(InvalidInputError):
        ramp_time_for_displacement(1.0, mu=0.6)


def test_construction_is_deterministic():
    a, b = two_block_impact(0), two_block_impact(0)
    assert a.model.mesh.X.tobytes() == b.model.mesh.X.tobytes()
    assert a.state.a.tobytes() == b.state.a.tobytes()


def test_rounded_extent_keeps_exact_size(caplog):
    mesh = build_block_mesh((1.0, 1.0, 0.3), 0.25)
    assert "not a multiple" in caplog.text
    assert np.ptp(mesh.X[:, 2]) == pytest.approx(0.3)
    with pytest.raises(InvalidInputError):
        build_block_mesh((0.0, 1.0, 1.0), 0.5)
