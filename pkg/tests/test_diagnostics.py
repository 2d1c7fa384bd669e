import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apic_contact.diagnostics import (
    CSV_COLUMNS,
    CSVRecorder,
    angular_momentum,
    kinetic_energy,
    linear_momentum,
    measure,
    min_gap,
    point_triangle_distance,
    potential_energy,
    read_csv,
)
from apic_contact.fem import ElasticBody, Material, TetMesh
from apic_contact.integrator import Model, initialize, run
from apic_contact.scenarios import build_block_mesh, rotation_matrix
from apic_contact.spline import GridSpec
from apic_contact.transfers import APIC, apply_H, ParticleSet

SOFT = Material(1000.0, 1e6, 0.3)


def test_linear_momentum_examples():
    np.testing.assert_array_equal(linear_momentum([2.0], [[1.0, 0, 0]]), [2, 0, 0])
    np.testing.assert_array_equal(linear_momentum([1.0, 1.0], [[1.0, 2, 3], [-1.0, -2, -3]]), 0)


def test_angular_momentum_examples():
    np.testing.assert_array_equal(angular_momentum([1.0], [[1.0, 0, 0]], [[0, 1.0, 0]]), [0, 0, 1])
    s, m = 0.3, 2.0
    B = np.zeros((1, 3, 3))
    B[0, 1, 0], B[0, 0, 1] = s, -s
    np.testing.assert_allclose(angular_momentum([m], [[0.0, 0, 0]], [[0.0, 0, 0]], None, B), [0, 0, 2 * s * m])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_momenta_are_invariant_under_apic_round_trip(seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, (20, 3))
    m = rng.uniform(0.5, 2, 20)
    v, B = rng.normal(size=(20, 3)), rng.normal(size=(20, 3, 3))
    vh, Bh = apply_H(ParticleSet(x, m, v, B), GridSpec(0.4), APIC)
    p, ph = linear_momentum(m, v), linear_momentum(m, vh)
    L, Lh = angular_momentum(m, x, v, None, B), angular_momentum(m, x, vh, None, Bh)
    scale = np.sum(m * (np.abs(v).sum(1) * (1 + np.abs(x).max()) + np.abs(B).sum((1, 2))))
    assert np.abs(p - ph).max() < 1e-12 * scale
    assert np.abs(L - Lh).max() < 1e-12 * scale


def test_energies():
    assert kinetic_energy([2.0, 1.0], [[1.0, 0, 0], [0, 2.0, 0]]) == 3.0
    assert potential_energy([2.0], [[0, 0, 3.0]], [0, 0, -10.0]) == 60.0
    assert str(potential_energy([1.0], [[0, 0, 0.0]], [0, 0, -10.0])) == "0.0"


def cubes(offset, rotate=False):
    a = build_block_mesh((1.0, 1.0, 1.0), 0.5)
    R = rotation_matrix((1, 1, 0), 10.0) if rotate else None
    b = build_block_mesh((1.0, 1.0, 1.0), 0.5, rotation=R, translation=(offset, 0.2, -0.1))
    return TetMesh.merge([a, b])


def faces(mesh, body):
    return mesh.faces[mesh.body[mesh.faces[:, 0]] == body]


@pytest.mark.parametrize("offset,expect", [(1.5, 0.5), (1.0, 0.0), (0.9, -0.1)])
def test_gap_between_unit_cubes(offset, expect):
    mesh = cubes(offset)
    assert min_gap(mesh.X, faces(mesh, 0), faces(mesh, 1)) == pytest.approx(expect, abs=1e-12)


@pytest.mark.parametrize("offset", [1.3, 1.02, 0.95])
def test_gap_is_symmetric(offset):
    mesh = cubes(offset, rotate=True)
    a, b = faces(mesh, 0), faces(mesh, 1)
    assert abs(min_gap(mesh.X, a, b) - min_gap(mesh.X, b, a)) < 1e-12


def test_point_triangle_distance_regions():
    a, b, c = np.array([[0.0, 0, 0]]), np.array([[1.0, 0, 0]]), np.array([[0.0, 1, 0]])
    p = np.array([[0.2, 0.2, 2.0], [-1.0, -1.0, 0.0], [2.0, 0.0, 0.0], [0.5, -1.0, 0.0], [1.0, 1.0, 0.0]])
    d = point_triangle_distance(p, a, b, c)[:, 0]
    np.testing.assert_allclose(d, [2.0, math.sqrt(2), 1.0, 1.0, math.sqrt(0.5)], atol=1e-15)


def test_measure_and_csv_round_trip():
    mesh = build_block_mesh((1.0, 1.0, 1.0), 0.5)
    model = Model(mesh, ElasticBody(mesh, SOFT), GridSpec(0.5), 1e-3, None, gravity=(0, 0, -10.0))
    state = initialize(model)
    row = measure(model, state)
    assert row.KE == 0 and row.SE == 0
    assert row.PE == pytest.approx(0.0, abs=1e-9)  # centred at the origin
    assert math.isnan(row.min_gap)  # a single body has no gap
    buf = io.StringIO()
    rec = CSVRecorder(buf)
    run(model, state, 0.005, hooks=[rec])
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 7
    assert all(len(line.split(",")) == 12 for line in lines)
    # free fall keeps KE + PE constant
    E = [r.E_total for r in rec.rows]
    assert max(E) - min(E) < 1e-10 * max(abs(r.PE) for r in rec.rows[1:])


def test_csv_values_use_17_digits(tmp_path):
    mesh = build_block_mesh((1.0, 1.0, 1.0), 1.0)
    model = Model(mesh, ElasticBody(mesh, SOFT), GridSpec(1.0), 1e-3, None)
    state = initialize(model, v0=np.full(mesh.X.shape, 1.0 / 3.0))
    path = tmp_path / "d.csv"
    with open(path, "w", newline="") as fh:
        CSVRecorder(fh)(model, state)
    px = path.read_text().splitlines()[1].split(",")[1]
    assert len(px.replace(".", "")) == 17
    (row,) = read_csv(path)
    assert row.px == pytest.approx(1000.0 / 3.0, rel=1e-14)
    assert f"{row.px:.17g}" == px  # the text round-trips exactly
