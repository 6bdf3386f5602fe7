"""Pure-numpy fallback for the lattice value-table kernel.

Mirrors trackduel._dp_core.dp_value_table operation for operation: the
same pruned regions, the same feasibility tests and the same arithmetic
expressions, so both backends produce identical tables (the minimum over
a candidate set does not depend on evaluation order).
"""

from __future__ import annotations

import numpy as np


def dp_value_table(
    P: np.ndarray,
    evals: np.ndarray,
    estar: np.ndarray,
    umid: np.ndarray,
    node_ok: np.ndarray,
    wk: np.ndarray,
    tau_s: float,
    vmax: float,
    w1: float,
    cos_gamma: float,
    dist_cap: float,
    horizon: int,
    max_inc: int,
    m_anchor: int,
    V: np.ndarray,
) -> None:
    T, K = horizon, max_inc
    S, L = P.shape[0], P.shape[1]
    wmax = int(wk.max()) if len(wk) else 0

    V[T, :, :] = 0.0

    for tau in range(T - 1, 0, -1):
        jmax = min((tau - 1) * K, S - 1)
        mlo = max(m_anchor - (tau - 1) * wmax, 0)
        mhi = min(m_anchor + (tau - 1) * wmax, L - 1)
        n_j = jmax + 1
        n_m = mhi - mlo + 1

        best = np.full((n_j, n_m), np.inf)
        p1 = P[:n_j, mlo : mhi + 1]  # [n_j, n_m, 2]
        v_next = V[tau + 1]
        ok_next = node_ok[tau + 1]

        for k in range(K + 1):
            j2max = min(jmax + k, S - 1)
            nj_k = j2max - k + 1  # from-stations with j1 + k in range
            if nj_k <= 0:
                continue
            u = umid[:nj_k, k]  # [nj_k, 2]
            w = int(wk[k])
            for dm in range(-w, w + 1):
                m1lo = max(mlo, -dm)
                m1hi = min(mhi, L - 1 - dm)
                if m1lo > m1hi:
                    continue
                a, b = m1lo - mlo, m1hi - mlo + 1  # columns inside the block
                dx = P[k : k + nj_k, m1lo + dm : m1hi + dm + 1, 0] - p1[:nj_k, a:b, 0]
                dy = P[k : k + nj_k, m1lo + dm : m1hi + dm + 1, 1] - p1[:nj_k, a:b, 1]
                dist = np.sqrt(dx * dx + dy * dy)
                ok = ok_next[k : k + nj_k, m1lo + dm : m1hi + dm + 1] != 0
                ok &= dist <= dist_cap
                dot = dx * u[:, None, 0] + dy * u[:, None, 1]
                ok &= (dist == 0.0) | (dot >= cos_gamma * dist)
                t = dist / tau_s - vmax
                cost = np.where(
                    ok, t * t + v_next[k : k + nj_k, m1lo + dm : m1hi + dm + 1], np.inf
                )
                np.minimum(best[:nj_k, a:b], cost, out=best[:nj_k, a:b])

        lat = evals[mlo : mhi + 1] - estar[tau]
        V[tau, : jmax + 1, mlo : mhi + 1] = w1 * lat * lat + best
