"""Deterministic set-up of the two-block impact and ramp sliding problems."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .contact import FRICTION, SEPARATION, STICKY, ContactConfig
from .errors import InvalidInputError
from .fem import ElasticBody, Material, TetMesh
from .integrator import Model, SimState, initialize
from .spline import GridSpec
from .transfers import APIC

logger = logging.getLogger(__name__)

SCENARIOS = ("two-block", "ramp", "toy1d")

# Kuhn subdivision of the unit cube: each tet walks from corner 000 to 111
# along one permutation of the axes.  Neighbouring cubes triangulate shared
# faces identically, so the mesh is conforming.
_PERMUTATIONS = ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))


def rotation_matrix(axis, angle_deg) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    th = math.radians(angle_deg)
    K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + math.sin(th) * K + (1 - math.cos(th)) * (K @ K)


def _cells(extent, h):
    n = extent / h
    cells = int(math.ceil(n - 1e-9))
    if cells < 1:
        raise InvalidInputError(f"extent {extent} gives zero cells at h={h}")
    if abs(n - round(n)) > 1e-9:
        logger.warning("extent %g is not a multiple of h=%g; using %d cells", extent, h, cells)
    return cells


def build_block_mesh(extent, h, rotation=None, translation=(0.0, 0.0, 0.0), corner=None) -> TetMesh:
    """Structured box of Kuhn tetrahedra (six per hexahedral cell).

    The box spans ``[0, extent]`` (or ``[corner, corner + extent]``) in its
    local frame, centred on the origin when ``corner`` is omitted.  Cell
    counts round up when an extent is not a multiple of ``h``; the cell size
    then shrinks so the box keeps its exact extent.  The local frame is
    mapped with ``x -> rotation @ x + translation``.
    """
    extent = np.asarray(extent, dtype=float).reshape(3)
    counts = [_cells(e, h) for e in extent]
    if corner is None:
        corner = -0.5 * extent
    axes = [np.linspace(0.0, e, n + 1) + c for e, n, c in zip(extent, counts, corner)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    nx, ny, nz = (n + 1 for n in counts)

    def node(i, j, k):
        return (i * ny + j) * nz + k

    ci, cj, ck = np.meshgrid(*(np.arange(n) for n in counts), indexing="ij")
    ci, cj, ck = ci.ravel(), cj.ravel(), ck.ravel()
    tets = []
    for perm in _PERMUTATIONS:
        corners = [np.zeros(3, dtype=int)]
        for ax in perm:
            nxt = corners[-1].copy()
            nxt[ax] = 1
            corners.append(nxt)
        tets.append(np.stack([node(ci + c[0], cj + c[1], ck + c[2]) for c in corners], axis=1))
    tets = np.stack(tets, axis=1).reshape(-1, 4)

    # flip negatively oriented tets (odd permutations)
    d = grid[tets[:, 1:]] - grid[tets[:, :1]]
    neg = np.linalg.det(d) < 0
    tets[neg] = tets[neg][:, [0, 2, 1, 3]]

    R = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
    X = grid @ R.T + np.asarray(translation, dtype=float)
    return TetMesh(X, tets)


@dataclass
class Scenario:
    """A ready-to-run problem: model, initial state and metadata."""

    name: str
    model: Model
    state: SimState
    end_time: float
    params: dict = field(default_factory=dict)
    track_body: int | None = None


def _contact(dt, mode, law, mu, iterations, tau=None):
    if iterations is None:
        iterations = 0 if law == STICKY else 1
    return ContactConfig(tau=dt if tau is None else tau, mode=mode, law=law, mu=mu, iterations=iterations)


TWO_BLOCK_MATERIAL = Material(2700.0, 1e8, 0.3)
TWO_BLOCK_K = (0, -1, -2, -3, -4)
TWO_BLOCK_END_TIME = 0.04


def two_block_impact(
    k: int = 0,
    mode: str = APIC,
    law: str = SEPARATION,
    mu: float = 0.0,
    iterations: int | None = None,
    dt: float | None = None,
    tau: float | None = None,
    end_time: float = TWO_BLOCK_END_TIME,
) -> Scenario:
    """Two 3x3x3 blocks meeting at an angle.

    Block 2 starts as a copy of block 1 shifted by 3.8 in y and is then
    rotated 22 degrees about an axis parallel to global x through its own
    centre.
    """
    if k not in TWO_BLOCK_K:
        raise InvalidInputError(f"unsupported refinement level k={k}; choose from {TWO_BLOCK_K}")
    h = 2.0**k
    block1 = build_block_mesh((3.0, 3.0, 3.0), h)
    offset = np.array([0.0, 3.8, 0.0])
    block2 = build_block_mesh((3.0, 3.0, 3.0), h, rotation=rotation_matrix((1, 0, 0), 22.0), translation=offset)
    mesh = TetMesh.merge([block1, block2])
    body = ElasticBody(mesh, [TWO_BLOCK_MATERIAL, TWO_BLOCK_MATERIAL])
    dt = 1e-4 * h if dt is None else dt
    grid = GridSpec(2.0 * h)
    model = Model(mesh, body, grid, dt, _contact(dt, mode, law, mu, iterations, tau))
    v0 = np.where(mesh.body[:, None] == 0, [0.0, 35.0, 0.0], [-15.0, -35.0, -15.0])
    state = initialize(model, v0=v0)
    params = dict(k=k, h=h, grid=grid.h, dt=dt, tau=model.contact.tau, mode=mode, law=law, mu=mu,
                  iterations=model.contact.iterations)
    return Scenario("two-block", model, state, end_time, params)


RAMP_MATERIAL = Material(1e6, 1e10, 0.3)
RAMP_H = (0.25, 1.0 / 3.0, 0.5, 1.0)
RAMP_ANGLE = 30.0
RAMP_GRAVITY = 100.0
RAMP_DIMS = (4.0, 1.5, 0.25)
RAMP_BLOCK_START = 0.5


def ramp_scenario(
    h: float = 0.25,
    mu: float = 0.2,
    mode: str = APIC,
    law: str = FRICTION,
    iterations: int | None = None,
    dt: float | None = None,
    tau: float | None = None,
    end_time: float | None = None,
) -> Scenario:
    """A unit block resting on a 30 degree ramp whose bottom face is clamped.

    In the ramp's own frame the ramp occupies ``[0, 4] x [-0.75, 0.75] x
    [-0.25, 0]`` and the block ``[0.5, 1.5] x [-0.5, 0.5] x [0, 1]``; the
    assembly is then rotated about global y so the ramp descends in +x.
    Gravity acts along global -z.  ``h = 0.33`` is read as one third.
    """
    if abs(h - 0.33) < 1e-12:
        h = 1.0 / 3.0
    if not any(abs(h - r) < 1e-9 for r in RAMP_H):
        logger.warning("ramp mesh size h=%g is not one of the reference sizes", h)
    R = rotation_matrix((0, 1, 0), RAMP_ANGLE)
    L, W, T = RAMP_DIMS
    ramp = build_block_mesh((L, W, T), h, rotation=R, corner=(0.0, -W / 2, -T))
    block = build_block_mesh((1.0, 1.0, 1.0), h, rotation=R, corner=(RAMP_BLOCK_START, -0.5, 0.0))
    mesh = TetMesh.merge([block, ramp])
    body = ElasticBody(mesh, [RAMP_MATERIAL, RAMP_MATERIAL])
    # clamp the ramp's bottom face (local z = -T)
    local = mesh.X @ R
    fixed = (mesh.body == 1) & (np.abs(local[:, 2] + T) < 1e-9)
    dt = 2.5e-5 * h if dt is None else dt
    grid = GridSpec(0.5 * h)
    gravity = np.array([0.0, 0.0, -RAMP_GRAVITY])
    model = Model(mesh, body, grid, dt, _contact(dt, mode, law, mu, iterations, tau), gravity=gravity, fixed=fixed)
    state = initialize(model)
    if end_time is None:
        end_time = ramp_time_for_displacement(1.0, RAMP_ANGLE, mu, RAMP_GRAVITY)
    params = dict(h=h, grid=grid.h, dt=dt, tau=model.contact.tau, mode=mode, law=law, mu=mu,
                  iterations=model.contact.iterations)
    return Scenario("ramp", model, state, end_time, params, track_body=0)


def ramp_analytic(t, theta_deg=RAMP_ANGLE, mu=0.2, g=RAMP_GRAVITY):
    """Horizontal displacement of a rigid block sliding from rest.

    Zero when friction holds the block (``mu >= tan theta``).
    """
    th = math.radians(theta_deg)
    g = abs(g)
    along = g * (math.sin(th) - mu * math.cos(th))
    t = np.asarray(t, dtype=float)
    if along <= 0:
        return np.zeros_like(t) if t.ndim else 0.0
    x = 0.5 * along * math.cos(th) * t**2
    return x if t.ndim else float(x)


def ramp_time_for_displacement(x, theta_deg=RAMP_ANGLE, mu=0.2, g=RAMP_GRAVITY) -> float:
    th = math.radians(theta_deg)
    acc = abs(g) * (math.sin(th) - mu * math.cos(th)) * math.cos(th)
    if acc <= 0:
        raise InvalidInputError("block does not slide for this friction coefficient")
    return math.sqrt(2.0 * x / acc)


def body_centroid(model: Model, x, body_id: int) -> np.ndarray:
    sel = model.mesh.body == body_id
    m = model.mass[sel]
    return m @ x[sel] / m.sum()
