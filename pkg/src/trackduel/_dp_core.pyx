# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel for the lattice value table.

Computes, backward over stages, the minimal remaining cost of every
reachable lattice node. Semantics are defined once and mirrored exactly
by the pure-numpy fallback (trackduel.dp_fallback); the benchmark and
tests assert the two produce identical tables.
"""

from libc.math cimport sqrt, INFINITY


def dp_value_table(
    double[:, :, ::1] P,
    double[::1] evals,
    double[::1] estar,
    double[:, :, ::1] umid,
    unsigned char[:, :, ::1] node_ok,
    int[::1] wk,
    double tau_s,
    double vmax,
    double w1,
    double cos_gamma,
    double dist_cap,
    int horizon,
    int max_inc,
    int m_anchor,
    double[:, :, ::1] V,
):
    cdef int T = horizon
    cdef int K = max_inc
    cdef int S = P.shape[0]
    cdef int L = P.shape[1]
    cdef int tau, j1, m1, k, j2, m2, jmax, mlo, mhi, m2lo, m2hi, w, wmax
    cdef double lat, best, dx, dy, dist, dot, t, cost, p1x, p1y, ux, uy

    wmax = 0
    for k in range(K + 1):
        if wk[k] > wmax:
            wmax = wk[k]

    # terminal stage: no remaining cost anywhere
    for j1 in range(S):
        for m1 in range(L):
            V[T, j1, m1] = 0.0

    for tau in range(T - 1, 0, -1):
        jmax = (tau - 1) * K
        if jmax > S - 1:
            jmax = S - 1
        mlo = m_anchor - (tau - 1) * wmax
        if mlo < 0:
            mlo = 0
        mhi = m_anchor + (tau - 1) * wmax
        if mhi > L - 1:
            mhi = L - 1
        for j1 in range(jmax + 1):
            for m1 in range(mlo, mhi + 1):
                p1x = P[j1, m1, 0]
                p1y = P[j1, m1, 1]
                lat = evals[m1] - estar[tau]
                lat = w1 * lat * lat
                best = INFINITY
                for k in range(K + 1):
                    j2 = j1 + k
                    if j2 >= S:
                        break
                    ux = umid[j1, k, 0]
                    uy = umid[j1, k, 1]
                    w = wk[k]
                    m2lo = m1 - w
                    if m2lo < 0:
                        m2lo = 0
                    m2hi = m1 + w
                    if m2hi > L - 1:
                        m2hi = L - 1
                    for m2 in range(m2lo, m2hi + 1):
                        if node_ok[tau + 1, j2, m2] == 0:
                            continue
                        dx = P[j2, m2, 0] - p1x
                        dy = P[j2, m2, 1] - p1y
                        dist = sqrt(dx * dx + dy * dy)
                        if dist > dist_cap:
                            continue
                        if dist > 0.0:
                            dot = dx * ux + dy * uy
                            if dot < cos_gamma * dist:
                                continue
                        t = dist / tau_s - vmax
                        cost = t * t + V[tau + 1, j2, m2]
                        if cost < best:
                            best = cost
                V[tau, j1, m1] = lat + best
