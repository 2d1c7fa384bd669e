"""PIC and APIC transfers between particles and the sparse background grid.

A round trip particle -> grid -> particle at fixed positions and masses is a
linear map ``H`` on generalized velocities ``{v, B}``; ``G = H - I`` maps any
field to one carrying no net linear momentum (PIC and APIC) and no net
angular momentum (APIC only, counting the affine term ``axl(B)``).

The grid is an unbounded lattice; only nodes that receive mass exist.  Nodes
are stored as lexicographically sorted integer triples so every reduction
runs in a fixed order and repeated calls are bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, TransferConsistencyError
from . import _kernels
from .spline import STENCIL_OFFSETS_3D, GridSpec, tensor_weights

PIC = "pic"
APIC = "apic"
MODES = (PIC, APIC)

# nodes with mass below this fraction of the total are treated as empty
MASS_EPSILON = 1e-300

_KEY_BITS = 21
_DENSE_LIMIT = 1 << 22
_KEY_SHIFT = 1 << (_KEY_BITS - 1)


def check_mode(mode: str) -> str:
    mode = str(mode).lower()
    if mode not in MODES:
        raise InvalidInputError(f"transfer mode must be one of {MODES}, got {mode!r}")
    return mode


def encode_nodes(nodes: np.ndarray) -> np.ndarray:
    """Pack integer triples into int64 keys whose order is lexicographic."""
    nodes = np.asarray(nodes, dtype=np.int64)
    if nodes.size and np.max(np.abs(nodes)) >= _KEY_SHIFT:
        raise InvalidInputError("particle lies too far from the grid origin")
    shifted = nodes + _KEY_SHIFT
    return (shifted[..., 0] << (2 * _KEY_BITS)) | (shifted[..., 1] << _KEY_BITS) | shifted[..., 2]


def decode_nodes(keys: np.ndarray) -> np.ndarray:
    keys = np.asarray(keys, dtype=np.int64)
    mask = (1 << _KEY_BITS) - 1
    out = np.stack([keys >> (2 * _KEY_BITS), (keys >> _KEY_BITS) & mask, keys & mask], axis=-1)
    return out - _KEY_SHIFT


def axl(B: np.ndarray) -> np.ndarray:
    """Axial vector ``axl(B)_a = eps_abc B_cb`` (angular momentum of the affine mode)."""
    B = np.asarray(B)
    return np.stack(
        [B[..., 2, 1] - B[..., 1, 2], B[..., 0, 2] - B[..., 2, 0], B[..., 1, 0] - B[..., 0, 1]],
        axis=-1,
    )


@dataclass
class ParticleSet:
    """Contact particles: positions, masses and generalized velocities."""

    x: np.ndarray
    m: np.ndarray
    v: np.ndarray
    B: np.ndarray | None = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).reshape(-1, 3)
        self.m = np.asarray(self.m, dtype=float).reshape(-1)
        self.v = np.asarray(self.v, dtype=float).reshape(-1, 3)
        if self.B is None:
            self.B = np.zeros((len(self.x), 3, 3))
        self.B = np.asarray(self.B, dtype=float).reshape(-1, 3, 3)
        n = len(self.x)
        if not (len(self.m) == len(self.v) == len(self.B) == n):
            raise InvalidInputError("particle arrays have inconsistent lengths")
        if not np.all(np.isfinite(self.x)):
            raise InvalidInputError("particle positions must be finite")
        if np.any(self.m <= 0):
            raise InvalidInputError("particle masses must be positive")

    def __len__(self):
        return len(self.x)


@dataclass
class SparseGridField:
    """Mass and momentum on the occupied lattice nodes, sorted by index."""

    nodes: np.ndarray
    mass: np.ndarray
    momentum: np.ndarray

    @property
    def velocity(self) -> np.ndarray:
        return self.momentum / self.mass[:, None]

    def as_dict(self) -> dict:
        return {
            tuple(int(c) for c in n): (float(mi), pi.copy())
            for n, mi, pi in zip(self.nodes, self.mass, self.momentum)
        }

    def __len__(self):
        return len(self.nodes)


class TransferOperator:
    """The round-trip operator ``H`` for fixed particle positions and masses.

    Weights, node lookups and grid masses are computed once so the operator
    can be applied repeatedly (the augury series uses it ``N + 1`` times per
    step).
    """

    def __init__(self, x, m, spec: GridSpec, mode: str = APIC):
        self.mode = check_mode(mode)
        self.spec = spec
        self.x = np.asarray(x, dtype=float).reshape(-1, 3)
        self.m = np.asarray(m, dtype=float).reshape(-1)
        if not np.all(np.isfinite(self.x)):
            raise InvalidInputError("particle positions must be finite")
        if np.any(self.m <= 0):
            raise InvalidInputError("particle masses must be positive")
        P = len(self.x)

        base, w, r = _kernels.stencil(self.x, spec.origin_array, float(spec.h))
        wm = w * self.m[:, None]
        lo = base.min(axis=0) - 1 if P else np.zeros(3, dtype=np.int64)
        dims = (base.max(axis=0) + 2 - lo + 1) if P else np.ones(3, dtype=np.int64)
        if P and np.prod(dims.astype(float)) <= _DENSE_LIMIT:
            # bounded box: row-major order of the box is lexicographic order
            flat = _kernels.dense_index(base, lo, dims)
            grid_mass = np.bincount(flat.ravel(), weights=wm.ravel(), minlength=int(np.prod(dims)))
            present = grid_mass > MASS_EPSILON * self.m.sum()
            occupied = np.nonzero(present)[0]
            nodes = np.stack(np.unravel_index(occupied, tuple(dims)), axis=1) + lo
        else:
            keys = encode_nodes(base[:, None, :] + STENCIL_OFFSETS_3D[None]).reshape(-1)
            unique_keys, flat = np.unique(keys, return_inverse=True)
            flat = flat.reshape(P, 64)
            grid_mass = np.bincount(flat.ravel(), weights=wm.ravel(), minlength=len(unique_keys))
            present = grid_mass > MASS_EPSILON * self.m.sum()
            nodes = decode_nodes(unique_keys[present])
        # compact numbering of occupied nodes; slot K stands for "no node"
        K = int(present.sum())
        compact = np.full(len(present), K, dtype=np.int64)
        compact[present] = np.arange(K)

        self.w = w
        self.wm = wm
        self.r = r
        self.index = compact[flat]
        self.node_mass = grid_mass[present]
        self._nodes = nodes.astype(np.int64)
        self.d_inv = 2.0 / spec.h**2
        self._K = K

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes

    def __len__(self):
        return len(self.x)

    # particle -> grid -------------------------------------------------
    def momentum(self, v, B=None) -> np.ndarray:
        """Grid momentum ``m_i v_i`` from particle velocities (and ``B`` in APIC)."""
        v = np.ascontiguousarray(v, dtype=float).reshape(-1, 3)
        apic = self.mode == APIC and B is not None
        if apic:
            C = self.d_inv * np.ascontiguousarray(B, dtype=float).reshape(-1, 3, 3)
        else:
            C = np.zeros((0, 3, 3))
        return _kernels.p2g(self.index, self.wm, self.r, v, C, apic, self._K)

    def to_grid(self, v, B=None) -> SparseGridField:
        return SparseGridField(self.nodes.copy(), self.node_mass.copy(), self.momentum(v, B))

    # grid -> particle -------------------------------------------------
    def interpolate(self, grid_velocity):
        """Particle ``(v, B)`` interpolated from velocities on the occupied nodes."""
        gv = np.ascontiguousarray(grid_velocity, dtype=float).reshape(-1, 3)
        return _kernels.g2p(self.index, self.w, self.r, gv, self.mode == APIC)

    # composed operators -----------------------------------------------
    def apply(self, v, B=None):
        """``H {v, B}``."""
        p = self.momentum(v, B)
        return self.interpolate(p / self.node_mass[:, None])

    def apply_G(self, v, B=None):
        """``(H - I) {v, B}``; the ``B`` part of the identity is dropped in PIC mode."""
        v = np.asarray(v, dtype=float).reshape(-1, 3)
        v_new, B_new = self.apply(v, B)
        if self.mode == APIC:
            B_old = np.zeros_like(B_new) if B is None else np.asarray(B, dtype=float).reshape(-1, 3, 3)
            return v_new - v, B_new - B_old
        return v_new - v, B_new


def particle_to_grid(particles: ParticleSet, spec: GridSpec, mode: str = APIC) -> SparseGridField:
    op = TransferOperator(particles.x, particles.m, spec, mode)
    return op.to_grid(particles.v, particles.B)


def grid_to_particle(grid: SparseGridField, particles: ParticleSet, spec: GridSpec, mode: str = APIC):
    """Interpolate ``(v, B)`` at the particles from an existing grid field.

    Every node with nonzero weight at a particle must be present in ``grid``;
    otherwise the grid was not built from this particle set.
    """
    mode = check_mode(mode)
    stencil_nodes, w = tensor_weights(particles.x, spec)
    keys = encode_nodes(stencil_nodes)
    grid_keys = encode_nodes(grid.nodes)
    order = np.argsort(grid_keys, kind="stable")
    sorted_keys = grid_keys[order]
    pos = np.searchsorted(sorted_keys, keys)
    pos_clipped = np.minimum(pos, len(sorted_keys) - 1)
    found = (pos < len(sorted_keys)) & (sorted_keys[pos_clipped] == keys)
    if np.any(~found & (w > 0)):
        p = int(np.nonzero(np.any(~found & (w > 0), axis=1))[0][0])
        raise TransferConsistencyError(f"particle {p} touches a grid node absent from the grid field")
    vel = grid.velocity[order][pos_clipped]
    vel[~found] = 0.0
    v_new = np.einsum("pk,pka->pa", w, vel)
    if mode == APIC:
        r = spec.node_position(stencil_nodes) - particles.x[:, None, :]
        B_new = np.einsum("pk,pka,pkb->pab", w, vel, r)
    else:
        B_new = np.zeros((len(particles), 3, 3))
    return v_new, B_new


def apply_H(particles: ParticleSet, spec: GridSpec, mode: str = APIC):
    op = TransferOperator(particles.x, particles.m, spec, mode)
    return op.apply(particles.v, particles.B)


def apply_G(particles: ParticleSet, spec: GridSpec, mode: str = APIC):
    op = TransferOperator(particles.x, particles.m, spec, mode)
    return op.apply_G(particles.v, particles.B)
