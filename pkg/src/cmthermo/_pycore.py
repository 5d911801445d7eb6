"""Pure-Python/NumPy implementation of the hot kernels.

Mirrors ``_core.pyx`` call for call. Random draws are supplied by the
caller in blocks, and each loop iteration consumes exactly one exponential
and one uniform draw, so both backends produce the same trajectory from the
same draws.
"""
import bisect

import numpy as np

KIND_FERMIONIC = 0
KIND_BOSONIC = 1

# row blocks keep the pair-sum temporaries below ~32 MB
_ROW_BLOCK = 2048


def _kernel(kind, s, x):
    a = np.abs(x)
    q = np.exp(-a)
    num = np.where(x > 0, q, q * q)
    if kind == KIND_FERMIONIC:
        return a * a * num / (1.0 + q) ** 3
    d = -np.expm1(-a)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a ** (s - 1.0) * (a / d) ** 3 * num
    return np.where(a == 0, 0.0, out)


def fi_pair_sum(u, wi, wj, kind, s):
    """Sum over ``a, b`` of ``wi[a] * wj[b] * kernel(u[b] - u[a])``."""
    u = np.asarray(u, dtype=float)
    wi = np.asarray(wi, dtype=float)
    wj = np.asarray(wj, dtype=float)
    total = 0.0
    for start in range(0, u.size, _ROW_BLOCK):
        sl = slice(start, start + _ROW_BLOCK)
        k = _kernel(kind, s, u[None, :] - u[sl, None])
        total += float(wi[sl] @ (k @ wj))
    return total


def simulate_block(cum_rates, state, t, tau, exp_draws, unif_draws, out_times, out_states, n_out):
    """Advance a jump process, recording each jump.

    Returns ``(n_draws_used, n_out, state, t, finished)``. Stops when the
    draws run out, the output buffers fill, or the next jump lands at or
    beyond ``tau`` (``finished``).
    """
    rows = [list(r) for r in np.asarray(cum_rates)]
    n_state = len(rows)
    cap = out_times.shape[0]
    n_draws = exp_draws.shape[0]
    i = 0
    while i < n_draws and n_out < cap:
        row = rows[state]
        total = row[-1]
        dwell = exp_draws[i] / total if total > 0 else np.inf
        if t + dwell >= tau:
            return i + 1, n_out, state, tau, True
        t += dwell
        nxt = bisect.bisect_right(row, unif_draws[i] * total)
        if nxt >= n_state:
            nxt = n_state - 1
        state = nxt
        out_times[n_out] = t
        out_states[n_out] = state
        n_out += 1
        i += 1
    return i, n_out, state, t, False


def stats_block(cum_rates, manifold, state, t, tau, exp_draws, unif_draws, acc):
    """Advance a jump process keeping only manifold statistics.

    ``acc`` holds ``[k, l, tau0, n_jumps]`` and is updated in place, where
    ``k``/``l`` count ground->excited / excited->ground jumps and ``tau0`` is
    the time spent in manifold 0. Returns ``(n_draws_used, state, t, finished)``.
    """
    cum_rates = np.asarray(cum_rates)
    if cum_rates.shape[0] == 2:
        return _two_state_stats(cum_rates, manifold, state, t, tau, exp_draws, acc)
    rows = [list(r) for r in cum_rates]
    man = list(manifold)
    n_state = len(rows)
    n_draws = exp_draws.shape[0]
    k, l, tau0, jumps = acc[0], acc[1], acc[2], acc[3]
    i = 0
    finished = False
    while i < n_draws:
        row = rows[state]
        total = row[-1]
        dwell = exp_draws[i] / total if total > 0 else np.inf
        i += 1
        if t + dwell >= tau:
            if man[state] == 0:
                tau0 += tau - t
            t = tau
            finished = True
            break
        if man[state] == 0:
            tau0 += dwell
        t += dwell
        nxt = bisect.bisect_right(row, unif_draws[i - 1] * total)
        if nxt >= n_state:
            nxt = n_state - 1
        if man[state] == 0 and man[nxt] == 1:
            k += 1
        elif man[state] == 1 and man[nxt] == 0:
            l += 1
        jumps += 1
        state = nxt
    acc[0], acc[1], acc[2], acc[3] = k, l, tau0, jumps
    return i, state, t, finished


def _two_state_stats(cum_rates, manifold, state, t, tau, exp_draws, acc):
    # states alternate, so the whole block is one cumulative sum
    rates = np.array([cum_rates[0, -1], cum_rates[1, -1]])
    n = exp_draws.shape[0]
    visited = (state + np.arange(n)) % 2
    with np.errstate(divide="ignore"):
        dwell = exp_draws / rates[visited]
    ends = np.cumsum(np.concatenate(([t], dwell)))[1:]
    cross = np.flatnonzero(ends >= tau)
    if cross.size:
        used = int(cross[0]) + 1
        finished = True
    else:
        used = n
        finished = False
    dw = dwell[:used].copy()
    vis = visited[:used]
    if finished:
        dw[-1] = tau - (ends[used - 2] if used > 1 else t)
    manifold = np.asarray(manifold)
    man = manifold[vis]
    # sequential running sum (adding 0.0 is exact) to match the compiled loop bit for bit
    acc[2] = float(np.cumsum(np.concatenate(([acc[2]], np.where(man == 0, dw, 0.0))))[-1])
    jumps = used - 1 if finished else used
    src = man[:jumps]
    dst = manifold[1 - vis[:jumps]]
    acc[0] += float(np.count_nonzero((src == 0) & (dst == 1)))
    acc[1] += float(np.count_nonzero((src == 1) & (dst == 0)))
    acc[3] += jumps
    new_state = int(vis[-1]) if finished else int((state + used) % 2)
    new_t = tau if finished else float(ends[used - 1])
    return used, new_state, new_t, finished
