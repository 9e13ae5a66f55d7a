"""Numba-compiled inner loops for the ODE sweeps and the Monte Carlo engine.

Array layout: value rows are indexed by inventory level offset iq = q - q_min,
quote rows by iq - 1 (the lowest level cannot sell). Sweep kernels return a
status index: -1 on success, otherwise the time step at which the explicit
scheme hit rate * dt >= 1.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_GAMMA = U64(0x9E3779B97F4A7C15)
_INV_2_53 = 1.0 / 9007199254740992.0
_TWO_PI = 6.283185307179586


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def _next_uniform(state):
    # splitmix64 step; uniform in [0, 1)
    state = state + _GAMMA
    z = _mix64(state)
    return state, (z >> U64(11)) * _INV_2_53


@njit(cache=True, inline="always")
def _next_normal(state):
    state, u1 = _next_uniform(state)
    state, u2 = _next_uniform(state)
    r = np.sqrt(-2.0 * np.log(1.0 - u1))
    return state, r * np.cos(_TWO_PI * u2)


@njit(cache=True)
def backward_sweep(h_terminal, mean_path, dt, q_min, scale, kb, beta,
                   phi_pos, phi_neg, b_lo, b_hi):
    """Explicit Euler sweep from the terminal condition back to t = 0.

    The mean-quote path is sampled at the right endpoint of each grid cell.
    Returns (values, quotes, status).
    """
    n_q = h_terminal.size
    n = mean_path.size - 1
    h = np.empty((n_q, n + 1))
    f = np.empty((n_q - 1, n + 1))
    inv_kb = 1.0 / kb
    for iq in range(n_q):
        h[iq, n] = h_terminal[iq]
    for iq in range(n_q - 1):
        f[iq, n] = min(b_hi, max(inv_kb + h[iq + 1, n] - h[iq, n], b_lo))
    for j in range(n - 1, -1, -1):
        common = scale * np.exp(beta * mean_path[j + 1]) * dt
        h[0, j] = h[0, j + 1] - dt * (phi_pos if q_min >= 0 else phi_neg) * q_min * q_min
        for iq in range(1, n_q):
            q = q_min + iq
            d = f[iq - 1, j + 1]
            ldt = common * np.exp(-kb * d)
            if ldt >= 1.0:
                return h, f, j
            ph = phi_pos if q >= 0 else phi_neg
            h[iq, j] = h[iq, j + 1] + ldt * (d + h[iq - 1, j + 1] - h[iq, j + 1]) - dt * ph * q * q
        for iq in range(n_q - 1):
            f[iq, j] = min(b_hi, max(inv_kb + h[iq + 1, j] - h[iq, j], b_lo))
    return h, f, -1


@njit(cache=True)
def forward_sweep(quotes, mean_path, dt, scale, kb, beta):
    """Explicit Euler evolution of the inventory distribution from full stock.

    Rates are sampled at the left endpoint of each grid cell; every flow term
    is applied once as outflow and once as inflow, so mass is conserved
    exactly. Returns (proportions, status).
    """
    n_q = quotes.shape[0] + 1
    n = quotes.shape[1] - 1
    prop = np.zeros((n_q, n + 1))
    prop[n_q - 1, 0] = 1.0
    for j in range(n):
        common = scale * np.exp(beta * mean_path[j]) * dt
        for iq in range(n_q):
            prop[iq, j + 1] = prop[iq, j]
        for iq in range(n_q - 1):
            ldt = common * np.exp(-kb * quotes[iq, j])
            if ldt >= 1.0:
                return prop, j
            flow = ldt * prop[iq + 1, j]
            prop[iq + 1, j + 1] -= flow
            prop[iq, j + 1] += flow
    return prop, -1


@njit(cache=True)
def simulate_paths(quotes, mean_path, dt, q_min, scale, kb, beta,
                   sigma, s0, x0, alpha_pos, alpha_neg, phi_pos, phi_neg,
                   n_paths, seed, checkpoints):
    """Bernoulli-thinned sale simulation on the solver grid.

    Each path draws one uniform per time step from its own counter-based
    stream (so runs with a common seed are coupled step-by-step across
    different quote surfaces), plus normals for the reference-price leg only
    at fill times. Returns (per-path objective values, inventory counts at
    the checkpoint indices, status).
    """
    n_q = quotes.shape[0] + 1
    n = quotes.shape[1] - 1
    horizon = n * dt
    objective = np.empty(n_paths)
    hist = np.zeros((checkpoints.size, n_q), dtype=np.int64)
    for path in range(n_paths):
        ustate = _mix64(U64(seed) ^ _mix64(U64(path) + U64(1)))
        nstate = _mix64(ustate ^ U64(0xD1B54A32D192ED03))
        iq = n_q - 1
        cash = x0
        w = 0.0
        t_prev = 0.0
        run_penalty = 0.0
        ck = 0
        for j in range(n):
            if ck < checkpoints.size and j == checkpoints[ck]:
                hist[ck, iq] += 1
                ck += 1
            q = q_min + iq
            ph = phi_pos if q >= 0 else phi_neg
            run_penalty += ph * q * q * dt
            ustate, u = _next_uniform(ustate)
            if iq > 0:
                d = quotes[iq - 1, j]
                ldt = scale * np.exp(-kb * d + beta * mean_path[j]) * dt
                if ldt >= 1.0:
                    return objective, hist, j
                if u < ldt:
                    t_fill = (j + 1) * dt
                    nstate, g = _next_normal(nstate)
                    w += np.sqrt(t_fill - t_prev) * g
                    t_prev = t_fill
                    cash += s0 + sigma * w + d
                    iq -= 1
        if ck < checkpoints.size and checkpoints[ck] == n:
            hist[ck, iq] += 1
        nstate, g = _next_normal(nstate)
        w += np.sqrt(horizon - t_prev) * g
        s_final = s0 + sigma * w
        q = q_min + iq
        a = alpha_pos if q >= 0 else alpha_neg
        objective[path] = cash + q * s_final - a * q * q - run_penalty
    return objective, hist, -1
