"""Sensitivity of the optimal two-level probe to Gaussian level disorder."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bath import BathModel, rate_fi_kernel
from .errors import DomainError
from .fisher import fi_rate_exact
from .optimize import optimize_two_level
from .spectrum import EnergySpectrum, TwoLevelAnsatz, perturb_gaussian

__all__ = ["BoundIngredients", "disorder_lower_bound", "RobustnessRow", "robustness_sweep", "linear_slope"]


@dataclass(frozen=True)
class BoundIngredients:
    q: float
    p: float
    c: float
    c_plus: float
    c_minus: float
    bound: float
    # levels below -sigma/2, which the bound's derivation excludes
    below_window: int


def disorder_lower_bound(spec: EnergySpectrum, x_star: float, sigma: float, bath: BathModel) -> BoundIngredients:
    """Lower bound on the FI rate from the levels near ``0`` and ``x_star``.

    ``q`` and ``p`` are the fractions of levels within ``sigma/2`` of the
    ground and excited energies, ``c = 1 / (1 - p + p e^{-x*})`` and
    ``c_plus``/``c_minus`` are the smallest forward/backward kernels over
    gaps in ``[x* - sigma, x* + sigma]``. The bound is
    ``q p N c e^{-sigma} (c_plus + c_minus e^{-x*})``.
    """
    x = spec.levels
    n = x.size
    half = sigma / 2.0
    q = np.count_nonzero(np.abs(x) <= half) / n
    p = np.count_nonzero(np.abs(x - x_star) <= half) / n
    gaps = np.linspace(max(x_star - sigma, 0.0), x_star + sigma, 401)
    c_plus = float(rate_fi_kernel(bath, gaps).min())
    c_minus = float(rate_fi_kernel(bath, -gaps).min())
    c = 1.0 / (1.0 - p + p * math.exp(-x_star))
    bound = q * p * n * c * math.exp(-sigma) * (c_plus + c_minus * math.exp(-x_star))
    return BoundIngredients(q, p, c, c_plus, c_minus, bound, int(np.count_nonzero(x < -half)))


@dataclass(frozen=True)
class RobustnessRow:
    n: int
    sigma: float
    trials: int
    optimum_per_level: float
    mean_per_level: float
    std_per_level: float
    frac_below_90: float
    mean_bound_per_level: float
    bound_violations: int
    window_violation_frac: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def robustness_sweep(bath: BathModel, n: int, sigmas, trials: int = 100, seed: int = 0,
                     base: TwoLevelAnsatz | None = None) -> list[RobustnessRow]:
    """Perturb the optimal two-level spectrum and tabulate the exact FI rate.

    One child ``SeedSequence`` per sigma, one grandchild per trial.
    ``bound_violations`` counts trials where the analytic bound exceeds the
    exact value; ``window_violation_frac`` is the fraction of trials with
    some level below ``-sigma/2``.
    """
    if trials < 10:
        raise DomainError("need at least 10 trials")
    if base is None:
        base = optimize_two_level(n, bath).best
    opt = fi_rate_exact(base.to_spectrum(), bath)
    rows = []
    children = np.random.SeedSequence(seed).spawn(len(sigmas))
    for sigma, child in zip(sigmas, children):
        vals, bounds, below = [], [], 0
        for ss in child.spawn(trials):
            spec = perturb_gaussian(base, sigma, ss)
            vals.append(fi_rate_exact(spec, bath))
            ing = disorder_lower_bound(spec, base.x, sigma, bath)
            bounds.append(ing.bound)
            below += ing.below_window > 0
        vals = np.asarray(vals)
        bounds = np.asarray(bounds)
        rows.append(RobustnessRow(
            n=n,
            sigma=float(sigma),
            trials=trials,
            optimum_per_level=opt / n,
            mean_per_level=float(vals.mean() / n),
            std_per_level=float(vals.std(ddof=1) / n),
            frac_below_90=float(np.mean(vals < 0.9 * opt)),
            mean_bound_per_level=float(bounds.mean() / n),
            bound_violations=int(np.count_nonzero(bounds > vals * (1.0 + 1e-12))),
            window_violation_frac=below / trials,
        ))
    return rows


def linear_slope(ns, values) -> float:
    """Least-squares slope of ``values`` against ``ns``."""
    return float(np.polyfit(np.asarray(ns, dtype=float), np.asarray(values, dtype=float), 1)[0])
