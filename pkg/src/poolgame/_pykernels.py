"""Pure-Python reference kernels.

These mirror ``_ckernels.pyx`` operation for operation so both backends give
bit-identical floating point results. Keep the two files in sync.
"""
import math

import numpy as np


def _rhs(x, weights, omega, price, out):
    m = len(x)
    total = 0.0
    for j in range(m):
        total += omega[j] * x[j]
    if total == 0.0:
        return math.nan
    ybar = 0.0
    u = [0.0] * m
    for i in range(m):
        u[i] = weights[i] / total - price * omega[i]
        ybar += x[i] * u[i]
    norm = 0.0
    for i in range(m):
        v = x[i] * (u[i] - ybar)
        out[i] = v
        if v != v:
            norm = math.nan
        elif norm == norm and abs(v) > norm:
            norm = abs(v)
    return norm


def replicator_rhs(x, weights, omega, price):
    """Replicator velocity with entrant payoffs ``weights/S - price*omega``."""
    xs = [float(v) for v in x]
    out = [0.0] * len(xs)
    if sum(o * v for o, v in zip(omega, xs)) == 0.0:
        raise ZeroDivisionError("zero total hash rate")
    _rhs(xs, [float(w) for w in weights], [float(o) for o in omega], float(price), out)
    return np.array(out)


def rk4_integrate(x0, weights, omega, price, step, n_steps, tol, record_every):
    """Fixed-step RK4 with clamp-and-renormalize projection onto the simplex.

    Returns ``(times, states, converged, fail_time, rhs_norm)``. ``fail_time``
    is NaN unless a non-finite value appeared.
    """
    m = len(x0)
    x = [float(v) for v in x0]
    w = [float(v) for v in weights]
    om = [float(v) for v in omega]
    price = float(price)
    h = float(step)
    hh = 0.5 * h
    h6 = h / 6.0
    k1 = [0.0] * m
    k2 = [0.0] * m
    k3 = [0.0] * m
    k4 = [0.0] * m
    xs = [0.0] * m
    times = [0.0]
    states = [list(x)]
    fail_time = math.nan

    norm = _rhs(x, w, om, price, k1)
    if norm != norm:
        return np.array(times), np.array(states), False, 0.0, norm
    converged = norm < tol
    n = 0
    while not converged and n < n_steps:
        n += 1
        t = n * h
        for i in range(m):
            xs[i] = x[i] + hh * k1[i]
        bad = _rhs(xs, w, om, price, k2)
        for i in range(m):
            xs[i] = x[i] + hh * k2[i]
        bad += _rhs(xs, w, om, price, k3)
        for i in range(m):
            xs[i] = x[i] + h * k3[i]
        bad += _rhs(xs, w, om, price, k4)
        if bad != bad:
            fail_time = t
            break
        total = 0.0
        for i in range(m):
            v = x[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if v < 0.0:
                v = 0.0
            xs[i] = v
            total += v
        if not (total > 0.0 and total < math.inf):
            fail_time = t
            break
        for i in range(m):
            x[i] = xs[i] / total
        norm = _rhs(x, w, om, price, k1)
        if norm != norm or norm == math.inf:
            fail_time = t
            break
        converged = norm < tol
        if converged or n % record_every == 0 or n == n_steps:
            times.append(t)
            states.append(list(x))
    return np.array(times), np.array(states), converged, fail_time, norm


def apply_switches(assign, candidates, draws, table, counts):
    """Move miner ``k`` to ``candidates[k]`` when ``draws[k] < table[cur, cand]``.

    Updates ``assign`` and ``counts`` in place.
    """
    switch = draws < table[assign, candidates]
    assign[switch] = candidates[switch]
    counts[:] = np.bincount(assign, minlength=counts.size)
