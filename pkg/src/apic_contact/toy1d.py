"""Two equal particles approaching each other inside one background cell.

The pair is mirror symmetric, so only the left particle is tracked.  All
quantities are nondimensional: positions are scaled by the cell half-width
and velocities by the initial speed, which leaves the augury time ``tau`` as
the single parameter.  The background functions are linear hats, so the
reduced dynamics are polynomial in ``x``:

    x' = v
    v' = ((x^2 - 1) v - x B) / tau          (APIC)
    B' = ((x^3 - x) v - x^2 B) / tau

and ``v' = (x^2 - 1) v / tau`` with no ``B`` for PIC.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numba as nb
import numpy as np

from .errors import InvalidInputError
from .transfers import APIC, PIC, check_mode

TAU_SWEEP = (0.02, 0.05, 0.1, 0.2, 0.5)
CSV_COLUMNS = ("t", "x", "v", "a", "B")
BLOWUP = 10.0
STEPS_PER_TAU = 50


@dataclass(frozen=True)
class ToyState:
    x: float
    v: float
    B: float = 0.0


def apic_rhs(x, v, B, tau):
    """Time derivatives ``(x', v', B')`` of the APIC pair."""
    if not tau > 0:
        raise InvalidInputError("tau must be positive")
    dv = ((x * x - 1.0) * v - x * B) / tau
    dB = ((x**3 - x) * v - x * x * B) / tau
    return v, dv, dB


def pic_rhs(x, v, tau):
    """Time derivatives ``(x', v')`` of the PIC pair."""
    if not tau > 0:
        raise InvalidInputError("tau must be positive")
    return v, v * (x * x - 1.0) / tau


@nb.njit(cache=True)
def _deriv(x, v, B, tau, apic):
    if apic:
        return v, ((x * x - 1.0) * v - x * B) / tau, ((x**3 - x) * v - x * x * B) / tau
    return v, v * (x * x - 1.0) / tau, 0.0


@nb.njit(cache=True)
def _rk4(x, v, B, tau, dt, n, apic, sample_every, blowup):
    """Fixed-step RK4; returns sampled rows and whether |x| exceeded ``blowup``."""
    rows = np.empty((n // sample_every + 2, 5))
    rows[0] = (0.0, x, v, _deriv(x, v, B, tau, apic)[1], B)
    k = 1
    for i in range(1, n + 1):
        k1x, k1v, k1B = _deriv(x, v, B, tau, apic)
        k2x, k2v, k2B = _deriv(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v, B + 0.5 * dt * k1B, tau, apic)
        k3x, k3v, k3B = _deriv(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v, B + 0.5 * dt * k2B, tau, apic)
        k4x, k4v, k4B = _deriv(x + dt * k3x, v + dt * k3v, B + dt * k3B, tau, apic)
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        B += dt / 6.0 * (k1B + 2.0 * k2B + 2.0 * k3B + k4B)
        bad = not (np.isfinite(x) and np.isfinite(v) and np.isfinite(B)) or abs(x) > blowup
        if bad or i % sample_every == 0 or i == n:
            rows[k] = (i * dt, x, v, _deriv(x, v, B, tau, apic)[1], B)
            k += 1
        if bad:
            return rows[:k], True
    return rows[:k], False


@dataclass
class ToyTrajectory:
    mode: str
    tau: float
    samples: np.ndarray  # rows of (t, x, v, a, B)
    unstable: bool

    @property
    def t(self):
        return self.samples[:, 0]

    @property
    def x(self):
        return self.samples[:, 1]

    @property
    def final(self) -> ToyState:
        _, x, v, _, B = self.samples[-1]
        return ToyState(float(x), float(v), float(B))


def integrate_toy(initial: ToyState, mode: str, tau: float, t_end: float, dt: float | None = None,
                  sample_every: int = 1) -> ToyTrajectory:
    """Classical RK4 integration of the pair up to ``t_end``.

    ``dt`` defaults to ``tau / 50`` and may not exceed it.  Integration stops
    early, with ``unstable`` set, once ``|x|`` exceeds 10 (the particles have
    passed each other and escaped).
    """
    mode = check_mode(mode)
    if not tau > 0:
        raise InvalidInputError("tau must be positive")
    if not t_end >= 0:
        raise InvalidInputError("t_end must be non-negative")
    if sample_every < 1:
        raise InvalidInputError("sample_every must be at least 1")
    limit = tau / STEPS_PER_TAU
    if dt is None:
        dt = limit
    if not 0 < dt <= limit * (1 + 1e-12):
        raise InvalidInputError(f"dt={dt} must lie in (0, tau/{STEPS_PER_TAU}] = (0, {limit}]")
    n = int(np.ceil(t_end / dt - 1e-9))
    apic = mode == APIC
    B0 = float(initial.B) if apic else 0.0
    rows, unstable = _rk4(float(initial.x), float(initial.v), B0, float(tau), float(dt), n, apic,
                          int(sample_every), BLOWUP)
    return ToyTrajectory(mode, tau, rows, bool(unstable))


def sweep(mode: str, taus=TAU_SWEEP, t_end: float = 40.0, initial: ToyState = ToyState(1.0, -1.0, 0.0),
          sample_every: int = 50):
    """One trajectory per ``tau``."""
    return [integrate_toy(initial, mode, tau, t_end, sample_every=sample_every) for tau in taus]


def write_trajectory(traj: ToyTrajectory, out_dir) -> Path:
    """Write ``toy1d_<mode>_tau<tau>.csv`` with columns ``t,x,v,a,B``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"toy1d_{traj.mode}_tau{traj.tau:g}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in traj.samples:
            w.writerow([f"{v:.17g}" for v in row])
    return path


def pic_terminal_position(x0: float, v0: float, tau: float) -> float:
    """Where a PIC pair comes to rest, from the first integral of its dynamics.

    ``dv/dx = (x^2 - 1) / tau`` integrates to ``v = v0 + (x^3/3 - x - x0^3/3 + x0) / tau``;
    the rest point is the root of ``v = 0`` reached first when moving from ``x0``.
    """
    c = v0 * tau - x0**3 / 3.0 + x0
    roots = np.roots([1.0 / 3.0, 0.0, -1.0, c])
    real = roots[np.abs(roots.imag) < 1e-12].real
    ahead = real[(real - x0) * np.sign(v0) > 0] if v0 else real
    if len(ahead) == 0:
        return float("nan")
    return float(ahead[np.argmin(np.abs(ahead - x0))])

