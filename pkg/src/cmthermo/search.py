"""Bracketed derivative-free maximization on an interval."""
from __future__ import annotations

import math

import numpy as np

from .errors import NoBracketError

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, a: float, b: float, tol: float = 1e-10, max_iter: int = 500):
    """Maximize a unimodal ``f`` on ``[a, b]``.

    The bracket shrinks by the golden ratio each step, so the number of
    evaluations is fixed by ``(b - a) / tol``. Returns ``(x, f(x), n_iter)``.
    """
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol and it < max_iter:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
        it += 1
    x = 0.5 * (a + b)
    fx = f(x)
    # keep the best interior point seen at the end
    for xc, fxc in ((c, fc), (d, fd)):
        if fxc > fx:
            x, fx = xc, fxc
    return x, fx, it


def maximize_1d(f, lo: float, hi: float, tol: float = 1e-9, grid: int = 256, log_grid: bool = False):
    """Maximize ``f`` on ``[lo, hi]``: grid scan to bracket, then golden section.

    The scan picks the best grid point and its two neighbours as the
    bracket, so unimodal objectives are located to ``tol``. Raises
    :class:`NoBracketError` when ``f`` is constant on the whole grid.

    Returns ``(x_star, f(x_star))``.
    """
    x, fx, _ = maximize_1d_full(f, lo, hi, tol=tol, grid=grid, log_grid=log_grid)
    return x, fx


def maximize_1d_full(f, lo, hi, tol=1e-9, grid=256, log_grid=False):
    """Like :func:`maximize_1d` but also returns the golden-section step count."""
    if not hi > lo:
        raise ValueError("need lo < hi")
    if log_grid and lo > 0:
        xs = np.geomspace(lo, hi, grid)
    else:
        xs = np.linspace(lo, hi, grid)
    vals = np.array([f(float(v)) for v in xs])
    ok = np.isfinite(vals)
    if not ok.any() or np.ptp(vals[ok]) <= 1e-14 * max(1.0, float(np.abs(vals[ok]).max())):
        raise NoBracketError("objective is flat on the search interval")
    finite = np.where(ok, vals, -np.inf)
    i = int(np.argmax(finite))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, grid - 1)]
    x, fx, it = golden_section(f, float(a), float(b), tol=tol)
    if finite[i] > fx:
        x, fx = float(xs[i]), float(finite[i])
    return float(x), float(fx), it
