"""Fisher-information rates of monitored probes.

Values are dimensionless FI rates. The physical Fisher information about
``T`` after monitoring for a time ``tau`` is recovered by
:func:`dimensional_fi`.
"""
from __future__ import annotations

import math
import warnings
from typing import NamedTuple

import numpy as np
from scipy.special import expit

from . import _backend
from .bath import BathModel, generator, rate, rate_fi_kernel, rate_fi_kernel_derivative
from .errors import DegenerateBosonicWarning, DomainError, SingularPopulationError
from .search import maximize_1d
from .spectrum import EnergySpectrum, TwoLevelAnsatz, equilibrium_distribution

__all__ = [
    "MONITORED",
    "EMPIRICAL",
    "EQUILIBRIUM",
    "fi_rate_exact",
    "fi_rate_and_gradient",
    "fi_rate_two_level",
    "pair_kernel_sum",
    "degeneracy_factor",
    "optimal_degeneracy_fraction",
    "fi_rate_asymptotic",
    "empirical_fi_asymptotic",
    "empirical_fi_two_level",
    "empirical_fi_rate",
    "ResetBound",
    "reset_bound",
    "equilibrium_fi",
    "equilibrium_fi_two_level",
    "EquilibriumOptimum",
    "equilibrium_optimum",
    "dimensional_fi",
]

MONITORED = "monitored"
EMPIRICAL = "empirical"
EQUILIBRIUM = "equilibrium"

X_MAX = 50.0


def _kind(bath: BathModel):
    core = _backend.core
    if bath.is_bosonic:
        return core.KIND_BOSONIC, float(bath.s)
    return core.KIND_FERMIONIC, 0.0


def fi_rate_exact(spec: EnergySpectrum, bath: BathModel, backend=None) -> float:
    """Dimensionless FI rate ``sum_i p_i sum_{j != i} kernel(x_j - x_i)``.

    Exactly degenerate levels are grouped first, so a two-level spectrum of
    any size costs a 2x2 sum.
    """
    core = _backend.get(backend)
    u, mult = spec.grouped()
    w = np.exp(-(u - u[0])) * mult
    p_group = w / w.sum()
    kind, s = _kind(bath)
    val = core.fi_pair_sum(
        np.ascontiguousarray(u), np.ascontiguousarray(p_group), mult.astype(float), kind, s
    )
    return max(float(val), 0.0)


def fi_rate_and_gradient(levels, bath: BathModel):
    """FI rate of an ungrouped level vector and its gradient in the levels."""
    x = np.asarray(levels, dtype=float)
    w = np.exp(-(x - x.min()))
    p = w / w.sum()
    gap = x[None, :] - x[:, None]  # gap[i, j] = x_j - x_i
    k = rate_fi_kernel(bath, gap)
    dk = rate_fi_kernel_derivative(bath, gap)
    row = k.sum(axis=1)
    f = float(p @ row)
    # d p_i / d x_a = -p_i (delta_ia - p_a)
    grad = -p * row + p * f
    grad -= p * dk.sum(axis=1)
    grad += p @ dk
    return f, grad


def pair_kernel_sum(x, bath: BathModel):
    """``kernel(x) + exp(-x) * kernel(-x)``: up and down jumps across one gap."""
    x = np.asarray(x, dtype=float)
    return rate_fi_kernel(bath, x) + np.exp(-x) * rate_fi_kernel(bath, -x)


def degeneracy_factor(n, n0, x):
    """``n0 (n - n0) / (n0 + (n - n0) e^{-x})``."""
    return n0 * (n - n0) / (n0 + (n - n0) * np.exp(-np.asarray(x, dtype=float)))


def fi_rate_two_level(a: TwoLevelAnsatz, bath: BathModel) -> float:
    return float(degeneracy_factor(a.n, a.n0, a.x) * pair_kernel_sum(a.x, bath))


def optimal_degeneracy_fraction(x, variant: str = MONITORED):
    """Ground-degeneracy fraction ``n0 / n`` that maximizes the FI at gap ``x``.

    Monitored and empirical probes share ``1 / (1 + e^{x/2})``; equilibrium
    thermometry uses ``1 / (1 + e^x)``.
    """
    x = np.asarray(x, dtype=float)
    if variant in (MONITORED, EMPIRICAL):
        out = expit(-x / 2.0)
    elif variant == EQUILIBRIUM:
        out = expit(-x)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return float(out) if out.ndim == 0 else out


def _fraction_factor(x, c):
    return c * (1.0 - c) / (c + (1.0 - c) * np.exp(-x))


def fi_rate_asymptotic(x, bath: BathModel):
    """Large-N FI per level at gap ``x`` with the optimal ground fraction."""
    x = np.asarray(x, dtype=float)
    c = optimal_degeneracy_fraction(x, MONITORED)
    out = _fraction_factor(x, c) * pair_kernel_sum(x, bath)
    return float(out) if out.ndim == 0 else out


def _empirical_pair(x, bath):
    # x^2 rate(x) / 2: x^2/(2(e^x+1)) fermionic, x^{2+s}/(2(e^x-1)) bosonic
    return 0.5 * x * x * rate(bath, x)


def empirical_fi_asymptotic(x, bath: BathModel):
    """Large-N empirical (population-average) FI per level at gap ``x``."""
    x = np.asarray(x, dtype=float)
    c = optimal_degeneracy_fraction(x, EMPIRICAL)
    out = _fraction_factor(x, c) * _empirical_pair(x, bath)
    return float(out) if out.ndim == 0 else out


def empirical_fi_two_level(a: TwoLevelAnsatz, bath: BathModel) -> float:
    return float(degeneracy_factor(a.n, a.n0, a.x) * _empirical_pair(a.x, bath))


def empirical_fi_rate(spec: EnergySpectrum, bath: BathModel) -> float:
    """FI rate available from time-averaged populations alone.

    Evaluates ``-1/2 dp^T Gamma P^{-1} dp`` where ``P = diag(p_eq)``,
    ``Gamma`` is the (row-convention) rate matrix in units of the bath's
    rate scale, and ``dp_i = T d p_i / dT = p_i (x_i - <x>)``.
    """
    p = equilibrium_distribution(spec)
    if np.any(p <= 0):
        raise SingularPopulationError("an equilibrium population underflows to zero")
    x = spec.levels
    v = p * (x - p @ x)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateBosonicWarning)
        g = generator(spec, bath) / bath.gamma
    return max(float(-0.5 * (v @ (g @ (v / p)))), 0.0)


class ResetBound(NamedTuple):
    x: float
    coefficient: float
    bound: float


def reset_bound(n: int, bath: BathModel, tol: float = 1e-10) -> ResetBound:
    """Measure-and-reset ceiling ``(n - 1) * max_x kernel(x)``.

    Returns the maximizing gap, the per-level coefficient and the bound.
    """
    if n < 2:
        raise DomainError("need at least two levels")
    x, k = maximize_1d(lambda v: float(rate_fi_kernel(bath, v)), 1e-6, X_MAX, tol=tol)
    return ResetBound(x, k, (n - 1) * k)


def equilibrium_fi(spec: EnergySpectrum) -> float:
    """``T^2`` times the equilibrium FI: the variance of ``x`` under Gibbs weights."""
    p = equilibrium_distribution(spec)
    x = spec.levels - spec.levels[0]
    m = p @ x
    return float(p @ (x - m) ** 2)


def equilibrium_fi_two_level(n: int, n0: int, x):
    x = np.asarray(x, dtype=float)
    e = np.exp(-x)
    out = n0 * (n - n0) * x * x * e / (n0 + (n - n0) * e) ** 2
    return float(out) if out.ndim == 0 else out


class EquilibriumOptimum(NamedTuple):
    n0: int
    x: float
    fi: float
    # value along the optimal-fraction curve clamped at n0 = 1
    x_clamped: float
    fi_clamped: float


def equilibrium_optimum(n: int, tol: float = 1e-10) -> EquilibriumOptimum:
    """Brute-force maximum of the equilibrium FI over integer ``n0`` and gap ``x``.

    Each ``n0`` gets its own bracketed 1-D search over ``x``. Also reports
    ``x = log(n - 1)`` and ``x^2 / 4``, the value reached when the fraction
    ``1 / (1 + e^x)`` is clamped at ``1 / n``.
    """
    if n < 3:
        raise DomainError("need n >= 3")
    best = None
    for n0 in range(1, n):
        x, f = maximize_1d(lambda v: equilibrium_fi_two_level(n, n0, v), 1e-3, 60.0, tol=tol, grid=128)
        if best is None or f > best[2]:
            best = (n0, x, f)
    xc = math.log(n - 1)
    return EquilibriumOptimum(best[0], best[1], best[2], xc, xc * xc / 4.0)


def dimensional_fi(fi_rate: float, bath: BathModel, temperature: float, tau: float) -> float:
    """Fisher information about ``T`` after monitoring for ``tau``.

    Fermionic: ``gamma tau fi_rate / T^2``. Bosonic with spectral density
    ``gamma w^s``: ``gamma tau T^(s-2) fi_rate``.
    """
    if temperature <= 0 or tau < 0:
        raise DomainError("temperature must be positive and tau non-negative")
    return bath.gamma * tau * temperature ** (bath.temperature_exponent - 2.0) * fi_rate
