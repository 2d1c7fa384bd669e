"""Augury acceleration corrections for contact.

The correction steers a velocity predicted ``tau`` ahead toward the field
preferred by the grid transfers::

    V_bar = V + tau * A_mech            (B has no mechanical rate)
    V_0   = H V_bar
    V_m+1 = V_m + G W_m+1,   W_m+1 = undesirable part of (V_m - V_bar)
    A_hat = (V_N - V_bar) / tau

Every term added to ``V_bar`` lies in the range of ``G`` so the correction
never changes net linear momentum, nor net angular momentum in APIC mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .spline import GridSpec
from .transfers import APIC, TransferOperator, check_mode

STICKY = "sticky"
SEPARATION = "separation"
FRICTION = "friction"
LAWS = (STICKY, SEPARATION, FRICTION)

# tangential change below this fraction of |dv| is treated as zero
TANGENT_EPS = 1e-14


@dataclass(frozen=True)
class ContactConfig:
    tau: float
    mode: str = APIC
    law: str = FRICTION
    mu: float = 0.0
    iterations: int = 1

    def __post_init__(self):
        object.__setattr__(self, "mode", check_mode(self.mode))
        law = str(self.law).lower()
        if law not in LAWS:
            raise InvalidInputError(f"contact law must be one of {LAWS}, got {self.law!r}")
        object.__setattr__(self, "law", law)
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise InvalidInputError(f"augury time tau must be positive, got {self.tau}")
        if not (np.isfinite(self.mu) and self.mu >= 0):
            raise InvalidInputError(f"friction coefficient must be non-negative, got {self.mu}")
        if int(self.iterations) != self.iterations or self.iterations < 0:
            raise InvalidInputError(f"iteration count must be a non-negative integer, got {self.iterations}")
        object.__setattr__(self, "iterations", int(self.iterations))
        if (law == STICKY) != (self.iterations == 0):
            raise InvalidInputError("the sticky law uses exactly zero augury iterations and vice versa")


def compute_normals(faces, coords, nodes=None) -> np.ndarray:
    """Area-weighted outward vertex normals from outward-oriented triangles.

    ``faces`` is ``(F, 3)`` node indices into ``coords``.  Returns unit
    normals for ``nodes`` (default: every node referenced by a face).
    """
    faces = np.asarray(faces, dtype=np.int64)
    coords = np.asarray(coords, dtype=float)
    a, b, c = coords[faces[:, 0]], coords[faces[:, 1]], coords[faces[:, 2]]
    # |cross| = 2 * area, direction = face normal: half of it is area * n_f
    area_normal = 0.5 * np.cross(b - a, c - a)
    area = np.linalg.norm(area_normal, axis=1)
    if np.any(area <= 0):
        bad = int(np.argmin(area))
        raise InvalidInputError(f"boundary face {bad} has zero area")
    acc = np.zeros((len(coords), 3))
    for k in range(3):
        for d in range(3):
            acc[:, d] += np.bincount(faces[:, k], weights=area_normal[:, d], minlength=len(coords))
    if nodes is None:
        nodes = np.unique(faces)
    acc = acc[np.asarray(nodes)]
    norm = np.linalg.norm(acc, axis=1)
    scale = np.abs(area_normal).max()
    if np.any(norm <= 1e-12 * scale):
        bad = int(np.asarray(nodes)[np.argmin(norm)])
        raise InvalidInputError(f"normal of node {bad} vanishes (opposing faces)")
    return acc / norm[:, None]


def predict_velocity(v, B, a, tau):
    """Generalized velocity predicted ``tau`` ahead; ``B`` has no mechanical rate."""
    return np.asarray(v) + tau * np.asarray(a), np.array(B, dtype=float, copy=True)


def base_correction(op: TransferOperator, v_bar, B_bar, tau):
    """``(1/tau) (H - I) V_bar``, the sticky-contact correction."""
    dv, dB = op.apply_G(v_bar, B_bar)
    if op.mode != APIC:
        dB = np.zeros_like(dB)
    return dv / tau, dB / tau


def undesirable_delta(dv, dB, n, law, mu=0.0):
    """Split off the part of a proposed velocity change that contact forbids.

    Works on single particles (``dv`` of shape ``(3,)``) or arrays ``(P, 3)``.
    A positive normal component pulls a particle out of its surface toward
    the other body and is always undesirable.  Under the friction law the
    tangential change beyond the Coulomb bound ``mu * |dv . n|`` is also
    undesirable, as is the whole ``B`` change.
    """
    single = np.ndim(dv) == 1
    dv = np.atleast_2d(np.asarray(dv, dtype=float))
    n = np.atleast_2d(np.asarray(n, dtype=float))
    dB = np.asarray(dB, dtype=float).reshape(len(dv), 3, 3)
    if np.any(np.abs(np.linalg.norm(n, axis=1) - 1.0) > 1e-8):
        raise InvalidInputError("contact normals must be unit vectors")
    law = str(law).lower()
    dn = np.einsum("pa,pa->p", dv, n)
    pulling = dn > 0

    if law == SEPARATION:
        dv_u = np.where(pulling[:, None], dv, 0.0)
        dB_u = np.where(pulling[:, None, None], dB, 0.0)
    elif law == FRICTION:
        if mu < 0:
            raise InvalidInputError("friction coefficient must be non-negative")
        dv_t = dv - dn[:, None] * n
        t_norm = np.linalg.norm(dv_t, axis=1)
        s = np.minimum(t_norm, -mu * dn)
        has_t = t_norm > TANGENT_EPS * np.linalg.norm(dv, axis=1)
        t_hat = np.divide(dv_t, t_norm[:, None], out=np.zeros_like(dv_t), where=has_t[:, None])
        compressive = dv_t - np.where(has_t, s, 0.0)[:, None] * t_hat
        dv_u = np.where(pulling[:, None], dv, compressive)
        dB_u = dB.copy()
    elif law == STICKY:
        dv_u = np.zeros_like(dv)
        dB_u = np.zeros_like(dB)
    else:
        raise InvalidInputError(f"unknown contact law {law!r}")

    if single:
        return dv_u[0], dB_u[0]
    return dv_u, dB_u


def augury_series(op: TransferOperator, v_bar, B_bar, normals, config: ContactConfig):
    """Corrected generalized velocity ``V_N`` after ``config.iterations`` terms."""
    v_hat, B_hat = op.apply(v_bar, B_bar)
    apic = op.mode == APIC
    if not apic:
        B_bar = np.zeros_like(B_hat)
    for _ in range(config.iterations):
        w_v, w_B = undesirable_delta(v_hat - v_bar, B_hat - B_bar, normals, config.law, config.mu)
        if not apic:
            w_B = None
        g_v, g_B = op.apply_G(w_v, w_B)
        v_hat = v_hat + g_v
        if apic:
            B_hat = B_hat + g_B
    return v_hat, B_hat


def full_correction(op: TransferOperator, v, B, a_mech, normals, config: ContactConfig):
    """Augury acceleration ``(A_v, A_B)`` for particles with velocity ``{v, B}``.

    ``op`` must be built at the current particle coordinates and masses.
    Returns zero ``A_B`` in PIC mode.
    """
    v_bar, B_bar = predict_velocity(v, B, a_mech, config.tau)
    v_hat, B_hat = augury_series(op, v_bar, B_bar, normals, config)
    a_v = (v_hat - v_bar) / config.tau
    if op.mode == APIC:
        a_B = (B_hat - B_bar) / config.tau
    else:
        a_B = np.zeros_like(B_bar)
    return a_v, a_B


def correction_for(x, m, v, B, a_mech, normals, spec: GridSpec, config: ContactConfig):
    """Convenience wrapper building the transfer operator at ``x``."""
    op = TransferOperator(x, m, spec, config.mode)
    return full_correction(op, v, B, a_mech, normals, config)
