"""Linear tetrahedral total-Lagrangian solid with a compressible Neo-Hookean law.

One quadrature point per element, so the deformation gradient is constant
inside each tetrahedron.  Nodal masses are row-sum lumped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ElementInversionError, InvalidInputError

# local face -> (three face nodes, opposite node)
_TET_FACES = ((1, 2, 3, 0), (0, 3, 2, 1), (0, 1, 3, 2), (0, 2, 1, 3))


@dataclass(frozen=True)
class Material:
    density: float
    youngs: float
    poisson: float

    def __post_init__(self):
        if not self.density > 0:
            raise InvalidInputError("density must be positive")
        if not self.youngs > 0:
            raise InvalidInputError("Young's modulus must be positive")
        if not -1.0 < self.poisson < 0.5:
            raise InvalidInputError("Poisson ratio must lie in (-1, 0.5)")

    @property
    def lame(self) -> float:
        E, nu = self.youngs, self.poisson
        return E * nu / ((1 + nu) * (1 - 2 * nu))

    @property
    def shear(self) -> float:
        return self.youngs / (2 * (1 + self.poisson))


def tet_volumes(X, tets) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    tets = np.asarray(tets)
    Dm = (X[tets[:, 1:]] - X[tets[:, :1]]).transpose(0, 2, 1)
    return np.linalg.det(Dm) / 6.0


def boundary_faces(tets) -> np.ndarray:
    """Triangles owned by exactly one tetrahedron, ordered as in ``tets``.

    Orientation follows the local face table, which points outward for a
    positively oriented tetrahedron.
    """
    tets = np.asarray(tets, dtype=np.int64)
    faces = []
    for i0, i1, i2, _ in _TET_FACES:
        faces.append(tets[:, [i0, i1, i2]])
    faces = np.concatenate(faces)
    keys = np.sort(faces, axis=1)
    _, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    return faces[counts[inverse] == 1]


@dataclass
class TetMesh:
    """Reference geometry of one or more bodies.

    ``faces`` are outward-oriented boundary triangles and ``boundary`` the
    sorted union of their nodes, i.e. the contact particles.
    """

    X: np.ndarray
    tets: np.ndarray
    body: np.ndarray = None
    faces: np.ndarray = None
    boundary: np.ndarray = field(default=None)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float).reshape(-1, 3)
        self.tets = np.asarray(self.tets, dtype=np.int64).reshape(-1, 4)
        if self.body is None:
            self.body = np.zeros(len(self.X), dtype=np.int64)
        self.body = np.asarray(self.body, dtype=np.int64)
        vol = tet_volumes(self.X, self.tets)
        if np.any(vol <= 0):
            bad = int(np.argmin(vol))
            raise InvalidInputError(f"tetrahedron {bad} has non-positive volume {vol[bad]:.3g}")
        if self.faces is None:
            self.faces = boundary_faces(self.tets)
        self.faces = np.asarray(self.faces, dtype=np.int64)
        if self.boundary is None:
            self.boundary = np.unique(self.faces)
        self.boundary = np.asarray(self.boundary, dtype=np.int64)

    @property
    def n_nodes(self) -> int:
        return len(self.X)

    @property
    def n_bodies(self) -> int:
        return int(self.body.max()) + 1 if len(self.body) else 0

    def volumes(self) -> np.ndarray:
        return tet_volumes(self.X, self.tets)

    @classmethod
    def merge(cls, meshes) -> "TetMesh":
        """Concatenate meshes, numbering bodies in order."""
        X, tets, faces, body = [], [], [], []
        offset = 0
        for b, mesh in enumerate(meshes):
            X.append(mesh.X)
            tets.append(mesh.tets + offset)
            faces.append(mesh.faces + offset)
            body.append(np.full(mesh.n_nodes, b, dtype=np.int64))
            offset += mesh.n_nodes
        return cls(np.concatenate(X), np.concatenate(tets), np.concatenate(body), np.concatenate(faces))


def lumped_mass(mesh: TetMesh, density) -> np.ndarray:
    """Row-sum lumped nodal masses; ``density`` is a scalar or per-element array."""
    vol = mesh.volumes()
    if np.any(vol <= 0):
        raise InvalidInputError("non-positive tetrahedron volume")
    rho = np.broadcast_to(np.asarray(density, dtype=float), vol.shape)
    share = np.repeat(rho * vol / 4.0, 4)
    return np.bincount(mesh.tets.ravel(), weights=share, minlength=mesh.n_nodes)


def neo_hookean_energy_density(F, lam, mu):
    """``W = mu/2 (tr(F^T F) - 3) - mu ln J + lam/2 (ln J)^2``."""
    F = np.asarray(F, dtype=float)
    J = np.linalg.det(F)
    if np.any(J <= 0):
        raise ElementInversionError(int(np.argmin(np.atleast_1d(J))), float(np.min(J)))
    lnJ = np.log(J)
    I1 = np.einsum("...ij,...ij->...", F, F)
    return 0.5 * mu * (I1 - 3.0) - mu * lnJ + 0.5 * lam * lnJ**2


def neo_hookean_stress(F, lam, mu):
    """First Piola-Kirchhoff stress ``mu (F - F^-T) + lam ln J F^-T``.

    Accepts a single ``(3, 3)`` gradient or a stack ``(E, 3, 3)`` with
    per-element ``lam`` and ``mu``.
    """
    F = np.asarray(F, dtype=float)
    J = np.linalg.det(F)
    if np.any(J <= 0):
        bad = int(np.argmin(np.atleast_1d(J)))
        raise ElementInversionError(bad, float(np.atleast_1d(J)[bad]))
    FinvT = np.swapaxes(np.linalg.inv(F), -1, -2)
    lam = np.asarray(lam, dtype=float)[..., None, None]
    mu = np.asarray(mu, dtype=float)[..., None, None]
    return mu * (F - FinvT) + lam * np.log(J)[..., None, None] * FinvT


class ElasticBody:
    """Precomputed reference quantities for internal force assembly.

    ``materials`` is one :class:`Material` per body of ``mesh``.
    """

    def __init__(self, mesh: TetMesh, materials):
        if isinstance(materials, Material):
            materials = [materials]
        materials = list(materials)
        if len(materials) != mesh.n_bodies:
            raise InvalidInputError(
                f"{mesh.n_bodies} bodies in the mesh but {len(materials)} materials given"
            )
        self.mesh = mesh
        self.materials = materials
        tet_body = mesh.body[mesh.tets[:, 0]]
        self.lam = np.array([materials[b].lame for b in tet_body])
        self.mu = np.array([materials[b].shear for b in tet_body])
        self.rho = np.array([materials[b].density for b in tet_body])
        X = mesh.X
        Dm = (X[mesh.tets[:, 1:]] - X[mesh.tets[:, :1]]).transpose(0, 2, 1)
        self.volume = np.linalg.det(Dm) / 6.0
        if np.any(self.volume <= 0):
            raise InvalidInputError("non-positive tetrahedron volume")
        self.Dm_inv = np.ascontiguousarray(np.linalg.inv(Dm))
        # reference gradients of the four shape functions, (E, 4, 3)
        grads = np.empty((len(mesh.tets), 4, 3))
        grads[:, 1:, :] = self.Dm_inv
        grads[:, 0, :] = -self.Dm_inv.sum(axis=1)
        self.grad_N = grads
        self.mass = lumped_mass(mesh, self.rho)

    def deformation_gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        Ds = (x[self.mesh.tets[:, 1:]] - x[self.mesh.tets[:, :1]]).transpose(0, 2, 1)
        return Ds @ self.Dm_inv

    def internal_force(self, x) -> np.ndarray:
        """``f_n = sum_e V_e P_e grad N_n`` (the gradient of the strain energy)."""
        x = np.ascontiguousarray(x, dtype=float)
        f, bad, det = _kernels.neo_hookean_forces(
            x, self.mesh.tets, self.Dm_inv, self.volume, self.lam, self.mu, self.grad_N
        )
        if bad >= 0:
            raise ElementInversionError(int(bad), float(det))
        return f

    def internal_force_reference(self, x) -> np.ndarray:
        """Vectorised numpy assembly, kept as an independent check of the kernel."""
        P = neo_hookean_stress(self.deformation_gradient(x), self.lam, self.mu)
        fe = np.einsum("e,eab,enb->ena", self.volume, P, self.grad_N)
        n = self.mesh.n_nodes
        idx = self.mesh.tets.ravel()
        fe = fe.reshape(-1, 3)
        return np.stack([np.bincount(idx, weights=fe[:, a], minlength=n) for a in range(3)], axis=1)

    def strain_energy(self, x) -> float:
        W = neo_hookean_energy_density(self.deformation_gradient(x), self.lam, self.mu)
        return float(np.dot(self.volume, W))


def internal_force(mesh: TetMesh, material, x) -> np.ndarray:
    return ElasticBody(mesh, material).internal_force(x)


def strain_energy(mesh: TetMesh, material, x) -> float:
    return ElasticBody(mesh, material).strain_energy(x)


def mechanical_acceleration(body: ElasticBody, x, gravity, fixed=None) -> np.ndarray:
    """``(f_ext - f_int) / m`` with gravity as the only external load.

    Nodes flagged in ``fixed`` get zero acceleration.
    """
    a = np.asarray(gravity, dtype=float)[None, :] - body.internal_force(x) / body.mass[:, None]
    if fixed is not None:
        a[fixed] = 0.0
    return a
