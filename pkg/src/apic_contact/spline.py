"""Quadratic B-spline basis on a uniform, unbounded Cartesian lattice.

Every point is covered by four 1D functions on nodes ``i-1 .. i+2`` where
``i`` is the cell index just to the left of the point.  With the local
coordinate ``s`` in ``[0, 1)`` the weights are::

    N[i-1] = a / 4
    N[i]   = (a + b) / 4
    N[i+1] = (b + c) / 4
    N[i+2] = c / 4

    a = (1 - s)**2,  b = 1 + 2 s - 2 s**2,  c = s**2

This basis is a partition of unity, reproduces linear functions, and has a
second moment about the evaluation point of ``h**2 / 2`` in every direction,
so the APIC inertia-like tensor ``D`` is the constant ``0.5 h**2 I``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

#: Node offsets (relative to the base cell) covered by one 1D stencil.
STENCIL_OFFSETS = np.arange(-1, 3)

#: All 64 integer offsets of the 3D tensor-product stencil, x-major.
STENCIL_OFFSETS_3D = np.stack(
    np.meshgrid(STENCIL_OFFSETS, STENCIL_OFFSETS, STENCIL_OFFSETS, indexing="ij"), axis=-1
).reshape(-1, 3)


@dataclass(frozen=True)
class GridSpec:
    """Uniform lattice with nodes at ``origin + h * (i, j, k)``."""

    h: float
    origin: tuple = field(default=(0.0, 0.0, 0.0))

    def __post_init__(self):
        if not (np.isfinite(self.h) and self.h > 0):
            raise InvalidInputError(f"grid spacing must be positive, got {self.h}")
        origin = tuple(float(o) for o in np.broadcast_to(np.asarray(self.origin, float), (3,)))
        object.__setattr__(self, "origin", origin)

    @property
    def origin_array(self) -> np.ndarray:
        return np.asarray(self.origin)

    def node_position(self, index) -> np.ndarray:
        """Physical position of integer lattice index (or array of indices)."""
        return self.origin_array + self.h * np.asarray(index, dtype=float)


@dataclass(frozen=True)
class WeightStencil1D:
    base: int
    weights: tuple

    @property
    def nodes(self):
        return tuple(self.base + o for o in STENCIL_OFFSETS)


def _check_finite(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("positions must be finite")
    return x


def cell_of(x, spec: GridSpec, axis: int = 0):
    """Index of the lattice node at or just below ``x`` along ``axis``."""
    x = _check_finite(x)
    xi = (x - spec.origin[axis]) / spec.h
    out = np.floor(xi).astype(np.int64)
    return int(out) if out.ndim == 0 else out


def _basis(s):
    a = (1.0 - s) ** 2
    b = 1.0 + 2.0 * s - 2.0 * s * s
    c = s * s
    return np.stack([0.25 * a, 0.25 * (a + b), 0.25 * (b + c), 0.25 * c], axis=-1)


def stencil(x, spec: GridSpec):
    """Vectorised 1D weights for points ``x`` of shape ``(..., 3)``.

    Returns ``(base, w)`` with integer base cells of shape ``(..., 3)`` and
    weights of shape ``(..., 3, 4)`` over nodes ``base-1 .. base+2``.
    """
    x = _check_finite(x)
    xi = (x - spec.origin_array) / spec.h
    base = np.floor(xi)
    s = xi - base
    return base.astype(np.int64), _basis(s)


def weights_1d(x: float, spec: GridSpec, axis: int = 0) -> WeightStencil1D:
    x = float(_check_finite(x))
    xi = (x - spec.origin[axis]) / spec.h
    base = np.floor(xi)
    w = _basis(xi - base)
    return WeightStencil1D(int(base), tuple(float(v) for v in w))


def weights_3d(x, spec: GridSpec) -> list:
    """List of ``((i, j, k), weight)`` for the 64 nodes covering point ``x``."""
    x = np.asarray(x, dtype=float).reshape(3)
    base, w = stencil(x, spec)
    w3 = (w[0][:, None, None] * w[1][None, :, None] * w[2][None, None, :]).reshape(-1)
    nodes = base + STENCIL_OFFSETS_3D
    return [(tuple(int(c) for c in n), float(wi)) for n, wi in zip(nodes, w3)]


def tensor_weights(x, spec: GridSpec):
    """Vectorised 3D stencil for particles ``x`` of shape ``(P, 3)``.

    Returns ``(nodes, w)``: integer node triples ``(P, 64, 3)`` and weights
    ``(P, 64)`` in the same order as :data:`STENCIL_OFFSETS_3D`.
    """
    base, w = stencil(x, spec)
    w3 = w[:, 0, :, None, None] * w[:, 1, None, :, None] * w[:, 2, None, None, :]
    nodes = base[:, None, :] + STENCIL_OFFSETS_3D[None, :, :]
    return nodes, w3.reshape(len(x), 64)


def d_tensor(spec: GridSpec) -> np.ndarray:
    """Second moment of the weights about any point: ``0.5 h**2 I``."""
    return 0.5 * spec.h**2 * np.eye(3)


def self_check(n: int = 64, seed: int = 0) -> None:
    """Assert partition of unity and linear completeness at random points."""
    rng = np.random.default_rng(seed)
    spec = GridSpec(1.0)
    x = rng.uniform(-50.0, 50.0, size=(n, 3))
    base, w = stencil(x, spec)
    if np.max(np.abs(w.sum(axis=-1) - 1.0)) > 1e-14:
        raise AssertionError("spline weights are not a partition of unity")
    nodes = base[..., None] + STENCIL_OFFSETS
    if np.max(np.abs((w * nodes).sum(axis=-1) - x)) > 1e-12:
        raise AssertionError("spline weights are not linearly complete")


self_check()
