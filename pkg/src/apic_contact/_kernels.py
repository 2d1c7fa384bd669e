"""Compiled inner loops for transfers and element forces.

All accumulations run serially in particle (or element) order so results
are bitwise reproducible.
"""

import numba as nb
import numpy as np


@nb.njit(cache=True)
def stencil(x, origin, h):
    """Base cells (P, 3), tensor weights (P, 64) and offsets x_i - x_p (P, 64, 3)."""
    P = x.shape[0]
    base = np.empty((P, 3), dtype=np.int64)
    w = np.empty((P, 64))
    r = np.empty((P, 64, 3))
    w1 = np.empty((3, 4))
    d1 = np.empty((3, 4))
    for p in range(P):
        for a in range(3):
            xi = (x[p, a] - origin[a]) / h
            b = np.floor(xi)
            s = xi - b
            base[p, a] = np.int64(b)
            aa = (1.0 - s) * (1.0 - s)
            bb = 1.0 + 2.0 * s - 2.0 * s * s
            cc = s * s
            w1[a, 0] = 0.25 * aa
            w1[a, 1] = 0.25 * (aa + bb)
            w1[a, 2] = 0.25 * (bb + cc)
            w1[a, 3] = 0.25 * cc
            for o in range(4):
                d1[a, o] = origin[a] + h * (b + o - 1) - x[p, a]
        k = 0
        for i in range(4):
            for j in range(4):
                wij = w1[0, i] * w1[1, j]
                for l in range(4):
                    w[p, k] = wij * w1[2, l]
                    r[p, k, 0] = d1[0, i]
                    r[p, k, 1] = d1[1, j]
                    r[p, k, 2] = d1[2, l]
                    k += 1
    return base, w, r


@nb.njit(cache=True)
def dense_index(base, lo, dims):
    """Row-major index of every stencil node inside the box starting at ``lo``."""
    P = base.shape[0]
    out = np.empty((P, 64), dtype=np.int64)
    for p in range(P):
        k = 0
        for i in range(4):
            ix = base[p, 0] + i - 1 - lo[0]
            for j in range(4):
                iy = base[p, 1] + j - 1 - lo[1]
                for l in range(4):
                    iz = base[p, 2] + l - 1 - lo[2]
                    out[p, k] = (ix * dims[1] + iy) * dims[2] + iz
                    k += 1
    return out


@nb.njit(cache=True)
def p2g(index, wm, r, v, C, apic, K):
    """Grid momentum; ``C = B D^-1`` enters only when ``apic``."""
    P = index.shape[0]
    mom = np.zeros((K + 1, 3))
    for p in range(P):
        for k in range(64):
            i = index[p, k]
            c = wm[p, k]
            for a in range(3):
                val = v[p, a]
                if apic:
                    val += C[p, a, 0] * r[p, k, 0] + C[p, a, 1] * r[p, k, 1] + C[p, a, 2] * r[p, k, 2]
                mom[i, a] += c * val
    return mom[:K]


@nb.njit(cache=True)
def g2p(index, w, r, grid_v, apic):
    """Particle velocity and (in APIC) ``B = sum w v_i (x_i - x_p)^T``."""
    P = index.shape[0]
    K = grid_v.shape[0]
    v = np.zeros((P, 3))
    B = np.zeros((P, 3, 3))
    for p in range(P):
        for k in range(64):
            i = index[p, k]
            if i >= K:
                continue
            c = w[p, k]
            for a in range(3):
                gv = c * grid_v[i, a]
                v[p, a] += gv
                if apic:
                    for b in range(3):
                        B[p, a, b] += gv * r[p, k, b]
    return v, B


@nb.njit(cache=True)
def neo_hookean_forces(x, tets, Dm_inv, vol, lam, mu, grad_N):
    """Internal nodal forces; returns (forces, index of first inverted element or -1, its det)."""
    n = x.shape[0]
    E = tets.shape[0]
    f = np.zeros((n, 3))
    Ds = np.empty((3, 3))
    F = np.empty((3, 3))
    Ginv = np.empty((3, 3))
    Pk = np.empty((3, 3))
    for e in range(E):
        t0 = tets[e, 0]
        for a in range(3):
            for c in range(3):
                Ds[a, c] = x[tets[e, c + 1], a] - x[t0, a]
        for a in range(3):
            for b in range(3):
                F[a, b] = Ds[a, 0] * Dm_inv[e, 0, b] + Ds[a, 1] * Dm_inv[e, 1, b] + Ds[a, 2] * Dm_inv[e, 2, b]
        # cofactor matrix = J F^-T
        Ginv[0, 0] = F[1, 1] * F[2, 2] - F[1, 2] * F[2, 1]
        Ginv[0, 1] = F[1, 2] * F[2, 0] - F[1, 0] * F[2, 2]
        Ginv[0, 2] = F[1, 0] * F[2, 1] - F[1, 1] * F[2, 0]
        Ginv[1, 0] = F[0, 2] * F[2, 1] - F[0, 1] * F[2, 2]
        Ginv[1, 1] = F[0, 0] * F[2, 2] - F[0, 2] * F[2, 0]
        Ginv[1, 2] = F[0, 1] * F[2, 0] - F[0, 0] * F[2, 1]
        Ginv[2, 0] = F[0, 1] * F[1, 2] - F[0, 2] * F[1, 1]
        Ginv[2, 1] = F[0, 2] * F[1, 0] - F[0, 0] * F[1, 2]
        Ginv[2, 2] = F[0, 0] * F[1, 1] - F[0, 1] * F[1, 0]
        J = F[0, 0] * Ginv[0, 0] + F[0, 1] * Ginv[0, 1] + F[0, 2] * Ginv[0, 2]
        if not (J > 0.0):
            return f, e, J
        lnJ = np.log(J)
        for a in range(3):
            for b in range(3):
                FinvT = Ginv[a, b] / J
                Pk[a, b] = mu[e] * (F[a, b] - FinvT) + lam[e] * lnJ * FinvT
        for m in range(4):
            node = tets[e, m]
            for a in range(3):
                acc = Pk[a, 0] * grad_N[e, m, 0] + Pk[a, 1] * grad_N[e, m, 1] + Pk[a, 2] * grad_N[e, m, 2]
                f[node, a] += vol[e] * acc
    return f, -1, 1.0
