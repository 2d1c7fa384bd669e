"""Quick built-in property checks, run by ``apic-contact verify``.

Each check returns ``(ok, detail)``; the suite takes a few seconds.
"""

from __future__ import annotations

import numpy as np

from .contact import ContactConfig, full_correction
from .diagnostics import angular_momentum, linear_momentum
from .fem import ElasticBody, Material
from .integrator import Model, initialize, run
from .scenarios import build_block_mesh
from .spline import GridSpec, tensor_weights
from .toy1d import ToyState, integrate_toy
from .transfers import APIC, PIC, TransferOperator, axl


def _cloud(rng, n, spec):
    x = rng.uniform(-2.0, 2.0, (n, 3)) * spec.h
    m = rng.uniform(0.5, 2.0, n)
    return x, m


def check_spline(rng):
    spec = GridSpec(0.37, origin=(0.1, -0.2, 0.05))
    x = rng.uniform(-5, 5, (10_000, 3))
    nodes, w = tensor_weights(x, spec)
    r = spec.node_position(nodes) - x[:, None, :]
    pou = np.max(np.abs(w.sum(axis=1) - 1.0))
    lin = np.max(np.abs(np.einsum("pk,pka->pa", w, r))) / spec.h
    D = np.einsum("pk,pka,pkb->pab", w, r, r)
    mom = np.max(np.abs(D - 0.5 * spec.h**2 * np.eye(3))) / spec.h**2
    ok = pou < 1e-14 and lin < 1e-13 and mom < 1e-13
    return ok, f"partition {pou:.1e}, linear {lin:.1e}, second moment {mom:.1e}"


def check_affine(rng):
    spec = GridSpec(0.5)
    worst = 0.0
    for _ in range(20):
        x, m = _cloud(rng, 30, spec)
        v0, L = rng.normal(size=3), rng.normal(size=(3, 3))
        v = v0 + x @ L.T
        B = np.broadcast_to(L @ (0.5 * spec.h**2 * np.eye(3)), (len(x), 3, 3))
        vh, Bh = TransferOperator(x, m, spec, APIC).apply(v, B)
        scale = np.abs(v).max() + np.abs(B).max()
        worst = max(worst, (np.abs(vh - v).max() + np.abs(Bh - B).max()) / scale)
    return worst < 1e-12, f"max relative change {worst:.1e}"


def check_momentum_free(rng):
    spec = GridSpec(0.5)
    worst_p = worst_L = 0.0
    for _ in range(20):
        x, m = _cloud(rng, 30, spec)
        v, B = rng.normal(size=(30, 3)), rng.normal(size=(30, 3, 3))
        for mode in (PIC, APIC):
            gv, gB = TransferOperator(x, m, spec, mode).apply_G(v, B if mode == APIC else None)
            scale = np.sum(m * np.linalg.norm(v, axis=1))
            worst_p = max(worst_p, np.linalg.norm(linear_momentum(m, gv)) / scale)
            if mode == APIC:
                L = angular_momentum(m, x, gv) + m @ axl(gB)
                Lscale = np.sum(m * np.linalg.norm(np.cross(x, v), axis=1)) + np.sum(m * np.linalg.norm(axl(B), axis=1))
                worst_L = max(worst_L, np.linalg.norm(L) / Lscale)
    return worst_p < 1e-12 and worst_L < 1e-12, f"linear {worst_p:.1e}, angular {worst_L:.1e}"


def check_toy(rng):
    start = ToyState(1.0, -1.0, 0.0)
    apic = integrate_toy(start, APIC, 0.1, 40.0, sample_every=1000)
    pic = integrate_toy(start, PIC, 0.1, 40.0, sample_every=1000)
    wild = integrate_toy(start, APIC, 5.0, 40.0, sample_every=1000)
    ok = abs(apic.final.x) < 1e-3 and abs(pic.final.x) > 0.05 and wild.unstable
    return ok, f"APIC x={apic.final.x:.1e}, PIC x={pic.final.x:.3f}, tau=5 unstable={wild.unstable}"


def check_free_fall(rng):
    mesh = build_block_mesh((1.0, 1.0, 1.0), 0.5)
    body = ElasticBody(mesh, Material(1000.0, 1e6, 0.3))
    g = np.array([0.0, 0.0, -9.81])
    model = Model(mesh, body, GridSpec(0.5), 1e-3, contact=None, gravity=g)
    v0 = np.array([1.0, 0.0, 2.0])
    state = run(model, initialize(model, v0=np.tile(v0, (mesh.n_nodes, 1))), 0.1)
    t = state.t
    expect = mesh.X + v0 * t + 0.5 * g * t**2
    err = np.abs(state.x - expect).max()
    return err < 1e-12, f"max position error {err:.1e} after {state.step} steps"


def check_force_gradient(rng):
    mesh = build_block_mesh((1.0, 1.0, 1.0), 0.5)
    body = ElasticBody(mesh, Material(1000.0, 1e6, 0.3))
    x = mesh.X + 0.05 * rng.normal(size=mesh.X.shape)
    f = body.internal_force(x)
    eps = 1e-6
    worst = 0.0
    for node in rng.choice(mesh.n_nodes, 5, replace=False):
        for a in range(3):
            xp, xm = x.copy(), x.copy()
            xp[node, a] += eps
            xm[node, a] -= eps
            fd = (body.strain_energy(xp) - body.strain_energy(xm)) / (2 * eps)
            worst = max(worst, abs(fd - f[node, a]) / np.abs(f).max())
    return worst < 1e-6, f"max relative difference {worst:.1e}"


def check_contact_momentum(rng):
    spec = GridSpec(0.5)
    x, m = _cloud(rng, 40, spec)
    v, B, a = rng.normal(size=(40, 3)), rng.normal(size=(40, 3, 3)), rng.normal(size=(40, 3))
    n = rng.normal(size=(40, 3))
    n /= np.linalg.norm(n, axis=1)[:, None]
    op = TransferOperator(x, m, spec, APIC)
    av, aB = full_correction(op, v, B, a, n, ContactConfig(1e-3, APIC, "friction", 0.3, 2))
    scale = np.sum(m * np.linalg.norm(av, axis=1))
    net = np.linalg.norm(m @ av) / scale
    torque = np.linalg.norm(angular_momentum(m, x, av) + m @ axl(aB)) / (scale * 2.0)
    return net < 1e-12 and torque < 1e-12, f"net force {net:.1e}, net torque {torque:.1e}"


CHECKS = {
    "spline partition of unity and moments": check_spline,
    "APIC affine preservation": check_affine,
    "momentum-free range of G": check_momentum_free,
    "contact correction conserves momentum": check_contact_momentum,
    "1D toy steady states": check_toy,
    "free fall is exact": check_free_fall,
    "internal force is the energy gradient": check_force_gradient,
}


def run_checks(seed: int = 0, stream=None):
    """Run every check, print one line each, and return ``True`` if all pass."""
    rng = np.random.default_rng(seed)
    all_ok = True
    for name, fn in CHECKS.items():
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crashing check is reported, not raised
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= bool(ok)
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        print(line, file=stream)
    return all_ok
