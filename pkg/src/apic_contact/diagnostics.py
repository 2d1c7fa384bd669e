"""Momentum, energy and contact-gap measurements, and their CSV stream."""

from __future__ import annotations

import csv
from dataclasses import astuple, dataclass, fields

import numpy as np

from .errors import InvalidInputError
from .transfers import axl

CSV_COLUMNS = ("time", "px", "py", "pz", "Lx", "Ly", "Lz", "KE", "SE", "PE", "E_total", "min_gap")

# a generic direction keeps parity rays away from mesh edges and vertices
_RAY = np.array([0.5773, 0.5881, 0.5665])
_RAY = _RAY / np.linalg.norm(_RAY)


def linear_momentum(m, v) -> np.ndarray:
    return np.einsum("n,na->a", np.asarray(m, float), np.asarray(v, float))


def angular_momentum(m, x, v, particles=None, B=None) -> np.ndarray:
    """``sum m x cross v`` about the origin plus ``sum_p m_p axl(B_p)``."""
    m = np.asarray(m, float)
    L = np.einsum("n,na->a", m, np.cross(x, v))
    if B is not None:
        mp = m if particles is None else m[particles]
        L = L + np.einsum("p,pa->a", mp, axl(B))
    return L


def kinetic_energy(m, v) -> float:
    # the B mode carries energy too; it is left out on purpose
    return 0.5 * float(np.einsum("n,na,na->", m, v, v))


def potential_energy(m, x, gravity) -> float:
    return -float(np.einsum("n,na,a->", m, x, gravity)) + 0.0  # no negative zero in output


def point_triangle_distance(p, a, b, c) -> np.ndarray:
    """Distance from points ``p`` (M, 3) to every triangle (T, 3) -> (M, T)."""
    p = p[:, None, :]
    a, b, c = a[None], b[None], c[None]
    ab, ac, ap = b - a, c - a, p - a
    d1 = np.einsum("mta,mta->mt", *np.broadcast_arrays(ab, ap))
    d2 = np.einsum("mta,mta->mt", *np.broadcast_arrays(ac, ap))
    bp = p - b
    d3 = np.einsum("mta,mta->mt", *np.broadcast_arrays(ab, bp))
    d4 = np.einsum("mta,mta->mt", *np.broadcast_arrays(ac, bp))
    cp = p - c
    d5 = np.einsum("mta,mta->mt", *np.broadcast_arrays(ab, cp))
    d6 = np.einsum("mta,mta->mt", *np.broadcast_arrays(ac, cp))

    # closest point by Voronoi region (Ericson, Real-Time Collision Detection)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = va + vb + vc
        v_in = vb / denom
        w_in = vc / denom
        t_ab = d1 / (d1 - d3)
        t_ac = d2 / (d2 - d6)
        t_bc = (d4 - d3) / ((d4 - d3) + (d5 - d6))

    closest = a + v_in[..., None] * ab + w_in[..., None] * ac
    regions = [
        ((d1 <= 0) & (d2 <= 0), np.broadcast_to(a, closest.shape)),
        ((d3 >= 0) & (d4 <= d3), np.broadcast_to(b, closest.shape)),
        ((d6 >= 0) & (d5 <= d6), np.broadcast_to(c, closest.shape)),
        ((vc <= 0) & (d1 >= 0) & (d3 <= 0), a + t_ab[..., None] * ab),
        ((vb <= 0) & (d2 >= 0) & (d6 <= 0), a + t_ac[..., None] * ac),
        ((va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0), b + t_bc[..., None] * (c - b)),
    ]
    # earlier regions take precedence
    for mask, point in reversed(regions):
        closest = np.where(mask[..., None], point, closest)
    return np.linalg.norm(p - closest, axis=-1)


def points_inside(p, a, b, c) -> np.ndarray:
    """Ray-parity containment of points ``p`` in the closed surface (a, b, c)."""
    e1, e2 = b - a, c - a
    h = np.cross(_RAY, e2)
    det = np.einsum("ta,ta->t", e1, h)
    ok = np.abs(det) > 1e-300
    inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    s = p[:, None, :] - a[None]
    u = np.einsum("mta,ta->mt", s, h) * inv
    q = np.cross(s, e1[None])
    w = (q @ _RAY) * inv
    t = np.einsum("mta,ta->mt", q, e2) * inv
    hit = ok & (u >= 0) & (w >= 0) & (u + w <= 1) & (t > 0)
    return hit.sum(axis=1) % 2 == 1


def _one_sided_gap(points, tris):
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    area = np.linalg.norm(np.cross(b - a, c - a), axis=1)
    if np.any(area <= 0):
        raise InvalidInputError("degenerate boundary triangle in gap computation")
    d = point_triangle_distance(points, a, b, c).min(axis=1)
    inside = points_inside(points, a, b, c)
    return float(np.min(np.where(inside, -d, d)))


def min_gap(x, faces_a, faces_b) -> float:
    """Signed minimum distance between two closed surfaces.

    Negative when a vertex of one body lies inside the other.  Symmetric in
    its arguments.
    """
    x = np.asarray(x, float)
    faces_a = np.asarray(faces_a)
    faces_b = np.asarray(faces_b)
    pa = x[np.unique(faces_a)]
    pb = x[np.unique(faces_b)]
    return min(_one_sided_gap(pa, x[faces_b]), _one_sided_gap(pb, x[faces_a]))


@dataclass
class DiagnosticsRow:
    time: float
    px: float
    py: float
    pz: float
    Lx: float
    Ly: float
    Lz: float
    KE: float
    SE: float
    PE: float
    E_total: float
    min_gap: float

    @property
    def momentum(self) -> np.ndarray:
        return np.array([self.px, self.py, self.pz])

    @property
    def angular(self) -> np.ndarray:
        return np.array([self.Lx, self.Ly, self.Lz])


def body_faces(mesh, body_id):
    return mesh.faces[mesh.body[mesh.faces[:, 0]] == body_id]


def measure(model, state, gap_bodies=(0, 1)) -> DiagnosticsRow:
    """All diagnostics for one state of an integrator model."""
    m = model.mass
    p = linear_momentum(m, state.v)
    B = state.B if model.apic else None
    L = angular_momentum(m, state.x, state.v, model.particles, B)
    ke = kinetic_energy(m, state.v)
    se = model.body.strain_energy(state.x)
    pe = potential_energy(m, state.x, model.gravity)
    gap = float("nan")
    if gap_bodies is not None and model.mesh.n_bodies > max(gap_bodies):
        gap = min_gap(state.x, body_faces(model.mesh, gap_bodies[0]), body_faces(model.mesh, gap_bodies[1]))
    return DiagnosticsRow(state.t, *p, *L, ke, se, pe, ke + se + pe, gap)


def format_value(v: float) -> str:
    return f"{v:.17g}"


class CSVRecorder:
    """Hook that measures a state and appends one CSV row per call."""

    def __init__(self, stream, gap_bodies=(0, 1)):
        self.stream = stream
        self.writer = csv.writer(stream, lineterminator="\n")
        self.writer.writerow(CSV_COLUMNS)
        self.rows: list[DiagnosticsRow] = []
        self.gap_bodies = gap_bodies

    def __call__(self, model, state):
        row = measure(model, state, self.gap_bodies)
        self.rows.append(row)
        self.writer.writerow([format_value(v) for v in astuple(row)])
        self.stream.flush()


def read_csv(path) -> list[DiagnosticsRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise InvalidInputError(f"unexpected diagnostics header {header}")
        return [DiagnosticsRow(*(float(v) for v in row)) for row in reader]


assert tuple(f.name for f in fields(DiagnosticsRow)) == CSV_COLUMNS
