"""Flat-array kernels for the exhaustive adversary.

Compiled with numba when available (see ``_accel``); otherwise they run as
plain Python. States are float64 vectors in bucket-coordinate order.
"""

from __future__ import annotations

import numpy as np

from ._accel import njit


@njit
def max_inc(A, rhs, x, coord, cap):
    step = cap
    m, d = A.shape
    for i in range(m):
        a = A[i, coord]
        if a > 0.0:
            load = 0.0
            for c in range(d):
                load += A[i, c] * x[c]
            slack = rhs[i] - load
            if slack < 0.0:
                slack = 0.0
            v = slack / a
            if v < step:
                step = v
    if step < 0.0:
        step = 0.0
    return step


@njit
def accept(A, rhs, x, K, M, k, mass):
    """Apply one arrival of 0-based type ``k`` in place; returns (row2, row1) amounts."""
    e2 = 0.0
    if k < M:
        e2 = max_inc(A, rhs, x, K + k, mass)
        x[K + k] += e2
    e1 = max_inc(A, rhs, x, k, mass - e2)
    x[k] += e1
    return e2, e1


@njit
def close_period(x, K, M, C, r, nxt):
    """Period reward; writes the rolled-over state into ``nxt``."""
    used = 0.0
    reward = 0.0
    for i in range(K):
        used += x[i]
        reward += r[i] * x[i]
    left = C - used
    if left < 0.0:
        left = 0.0
    for i in range(nxt.shape[0]):
        nxt[i] = 0.0
    for k in range(M - 1, -1, -1):
        b = x[K + k]
        s = b if b < left else left
        left -= s
        reward += r[k] * s
        nxt[k] = b - s
    return reward


@njit
def greedy_opt(tot, r, C):
    left = C
    val = 0.0
    for k in range(tot.shape[0] - 1, -1, -1):
        take = tot[k] if tot[k] < left else left
        val += take * r[k]
        left -= take
        if left <= 0.0:
            break
    return val


@njit
def ratio(reward, opt, eps):
    if opt <= eps:
        return 1.0
    return reward / opt


@njit
def search(A, rhs, r, K, M, C, q, T, B, eps):
    """Depth-first enumeration of every sequence with <= B events over T periods.

    Choices at a node: event (type k, mass j*C/q) for k-major, j-minor order,
    then "close the period". Each node stands for the sequence whose remaining
    periods are empty, so its value is the min of the closed-period ratios and
    the ratio obtained by closing the current period now.

    Returns (best value, witness choice path, path length, sequences visited).
    """
    D = A.shape[1]
    depth_max = B + T
    n_events = K * q
    xs = np.zeros((depth_max + 1, D))
    tots = np.zeros((depth_max + 1, K))
    per = np.zeros(depth_max + 1, np.int64)
    nev = np.zeros(depth_max + 1, np.int64)
    cmin = np.ones(depth_max + 1)
    choice = np.zeros(depth_max + 1, np.int64)
    path = np.zeros(depth_max + 1, np.int64)
    best_path = np.zeros(depth_max + 1, np.int64)
    scratch = np.zeros(D)

    best = 1.0
    best_len = 0
    count = 1
    depth = 0
    while depth >= 0:
        c = choice[depth]
        if c < n_events and nev[depth] >= B:
            c = n_events
        if c > n_events or (c == n_events and per[depth] >= T - 1):
            depth -= 1
            continue
        choice[depth] = c + 1
        ch = depth + 1
        for i in range(D):
            xs[ch, i] = xs[depth, i]
        for i in range(K):
            tots[ch, i] = tots[depth, i]
        per[ch] = per[depth]
        nev[ch] = nev[depth]
        cmin[ch] = cmin[depth]
        path[depth] = c
        choice[ch] = 0
        if c < n_events:
            k = c // q
            mass = (c % q + 1) * C / q
            accept(A, rhs, xs[ch], K, M, k, mass)
            tots[ch, k] += mass
            nev[ch] += 1
            count += 1
            rew = close_period(xs[ch], K, M, C, r, scratch)
            val = ratio(rew, greedy_opt(tots[ch], r, C), eps)
            if cmin[ch] < val:
                val = cmin[ch]
            if val < best:
                best = val
                best_len = ch
                for i in range(ch):
                    best_path[i] = path[i]
        else:
            rew = close_period(xs[depth], K, M, C, r, xs[ch])
            val = ratio(rew, greedy_opt(tots[depth], r, C), eps)
            if val < cmin[ch]:
                cmin[ch] = val
            for i in range(K):
                tots[ch, i] = 0.0
            per[ch] += 1
        depth = ch
    return best, best_path, best_len, count
