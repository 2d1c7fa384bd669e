"""Explicit Newmark (central difference) stepping with augury contact.

One step, with ``A = {a, A_B}`` the generalized acceleration::

    V_half  = V^n + dt/2 A^n
    x^{n+1} = x^n + dt v_half
    A^{n+1} = {a_mech(x^{n+1}), 0} + A_hat^{n+1}
    V^{n+1} = V_half + dt/2 A^{n+1}

``A_hat`` only acts on boundary nodes (the contact particles).  It is
computed from the prediction ``V^n + tau {a_mech(x^{n+1}), 0}``, with the
transfer operator and normals taken at ``x^{n+1}``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .contact import ContactConfig, compute_normals, full_correction
from .errors import ElementInversionError, InvalidInputError, NumericalFailure
from .fem import ElasticBody, TetMesh
from .spline import GridSpec, d_tensor
from .transfers import APIC, TransferOperator

logger = logging.getLogger(__name__)


@dataclass
class Model:
    """Everything about a run that does not change from step to step.

    ``contact=None`` switches contact off entirely (plain Newmark).
    """

    mesh: TetMesh
    body: ElasticBody
    grid: GridSpec
    dt: float
    contact: ContactConfig | None
    gravity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    fixed: np.ndarray | None = None

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise InvalidInputError(f"time step must be positive, got {self.dt}")
        self.gravity = np.asarray(self.gravity, dtype=float).reshape(3)
        fixed = np.zeros(self.mesh.n_nodes, dtype=bool)
        if self.fixed is not None:
            f = np.asarray(self.fixed)
            if f.dtype == bool:
                fixed |= f
            else:
                fixed[f] = True
        self.fixed = fixed

    @property
    def mass(self) -> np.ndarray:
        return self.body.mass

    @property
    def particles(self) -> np.ndarray:
        return self.mesh.boundary

    @property
    def apic(self) -> bool:
        return self.contact is not None and self.contact.mode == APIC


@dataclass
class SimState:
    """Nodal kinematics at ``t``; ``B`` and ``B_rate`` live on the particles."""

    t: float
    step: int
    x: np.ndarray
    v: np.ndarray
    a: np.ndarray
    B: np.ndarray
    B_rate: np.ndarray

    def copy(self) -> "SimState":
        return replace(
            self,
            x=self.x.copy(),
            v=self.v.copy(),
            a=self.a.copy(),
            B=self.B.copy(),
            B_rate=self.B_rate.copy(),
        )


def mechanical_acceleration(model: Model, x) -> np.ndarray:
    a = model.gravity[None, :] - model.body.internal_force(x) / model.mass[:, None]
    a[model.fixed] = 0.0
    return a


def contact_acceleration(model: Model, x, v, B, a_mech):
    """Augury correction ``(A_v, A_B)`` on the particles at coordinates ``x``."""
    p = model.particles
    op = TransferOperator(x[p], model.mass[p], model.grid, model.contact.mode)
    normals = compute_normals(model.mesh.faces, x, p)
    return full_correction(op, v[p], B, a_mech[p], normals, model.contact)


def _accelerations(model: Model, x, v, B, step):
    """Mechanical plus contact acceleration at ``x``.

    The contact prediction starts from the full-step velocity ``{v, B}`` of
    the previous step.
    """
    try:
        a_mech = mechanical_acceleration(model, x)
    except ElementInversionError as exc:
        raise ElementInversionError(exc.element, exc.det, step=step) from None
    a = a_mech.copy()
    B_rate = np.zeros_like(B)
    if model.contact is not None:
        a_v, a_B = contact_acceleration(model, x, v, B, a_mech)
        a[model.particles] += a_v
        a[model.fixed] = 0.0
        if model.apic:
            B_rate = a_B
    return a, B_rate


def initialize(model: Model, x0=None, v0=None, velocity_gradient=None) -> SimState:
    """State at ``t = 0`` with consistent initial accelerations.

    ``velocity_gradient`` is an optional constant ``L0`` (or one per particle)
    from which ``B(0) = L0 D`` is seeded in APIC mode.
    """
    mesh = model.mesh
    x = mesh.X.copy() if x0 is None else np.array(x0, dtype=float)
    v = np.zeros_like(x) if v0 is None else np.array(v0, dtype=float)
    if x.shape != mesh.X.shape or v.shape != mesh.X.shape:
        raise InvalidInputError("initial positions/velocities do not match the mesh")
    v[model.fixed] = 0.0
    P = len(model.particles)
    B = np.zeros((P, 3, 3))
    if velocity_gradient is not None and model.apic:
        L0 = np.broadcast_to(np.asarray(velocity_gradient, dtype=float), (P, 3, 3))
        B = L0 @ d_tensor(model.grid)
    a, B_rate = _accelerations(model, x, v, B, step=0)
    return SimState(0.0, 0, x, v, a, B, B_rate)


def step(model: Model, state: SimState) -> SimState:
    dt = model.dt
    n = state.step + 1
    v_half = state.v + 0.5 * dt * state.a
    B_half = state.B + 0.5 * dt * state.B_rate
    x = state.x + dt * v_half
    x[model.fixed] = state.x[model.fixed]
    a, B_rate = _accelerations(model, x, state.v, state.B, step=n)
    v = v_half + 0.5 * dt * a
    v[model.fixed] = 0.0
    B = B_half + 0.5 * dt * B_rate
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
        raise NumericalFailure("non-finite nodal state", step=n)
    return SimState(n * dt, n, x, v, a, B, B_rate)


def n_steps_for(model: Model, t_end: float) -> int:
    return int(np.floor(t_end / model.dt + 1e-9))


def run(model: Model, state: SimState, t_end: float, hooks=(), every: int = 1):
    """Advance to ``t_end``, calling each hook as ``hook(model, state)``.

    Hooks fire on the initial state and then every ``every`` steps (and on
    the final state).  Returns the final state.
    """
    if every < 1:
        raise InvalidInputError("hook cadence must be at least 1")
    hooks = list(hooks)
    for hook in hooks:
        hook(model, state)
    total = n_steps_for(model, t_end)
    for _ in range(state.step, total):
        state = step(model, state)
        if state.step % every == 0 or state.step == total:
            for hook in hooks:
                hook(model, state)
    return state
