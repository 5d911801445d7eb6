"""Bath models: transition rates, FI kernels and rate matrices.

All rates here are dimensionless: fermionic rates are in units of the
coupling ``gamma``, bosonic ones in units of ``gamma * T**s``. Both obey
``rate(x) = exp(-x) * rate(-x)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import DegenerateBosonicWarning, InvalidBathError
from .spectrum import EnergySpectrum, _load_json

__all__ = [
    "BathModel",
    "FERMIONIC",
    "BOSONIC",
    "ONE_PLUS",
    "parse_ohmicity",
    "rate",
    "rate_fi_kernel",
    "rate_fi_kernel_derivative",
    "physical_rate",
    "generator",
    "load_bath",
]

FERMIONIC = "fermionic"
BOSONIC = "bosonic"

# s = 1+ is evaluated at 1 + ONE_PLUS
ONE_PLUS = 1e-4


@dataclass(frozen=True)
class BathModel:
    kind: str = FERMIONIC
    gamma: float = 1.0
    s: float | None = None

    def __post_init__(self):
        if self.kind not in (FERMIONIC, BOSONIC):
            raise InvalidBathError(f"unknown bath kind {self.kind!r}")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise InvalidBathError("gamma must be positive")
        if self.kind == BOSONIC:
            if self.s is None or not self.s > 1:
                raise InvalidBathError("bosonic baths need ohmicity s > 1")
        elif self.s is not None:
            raise InvalidBathError("fermionic baths take no ohmicity")

    @classmethod
    def fermionic(cls, gamma: float = 1.0) -> "BathModel":
        return cls(FERMIONIC, gamma)

    @classmethod
    def bosonic(cls, s, gamma: float = 1.0) -> "BathModel":
        return cls(BOSONIC, gamma, parse_ohmicity(s))

    @property
    def is_bosonic(self) -> bool:
        return self.kind == BOSONIC

    @property
    def temperature_exponent(self) -> float:
        """Power of T carried by the physical rates (0 fermionic, s bosonic)."""
        return self.s if self.is_bosonic else 0.0

    def label(self) -> str:
        if not self.is_bosonic:
            return "fermionic"
        if abs(self.s - 1.0 - ONE_PLUS) < 1e-12:
            return "bosonic s=1+"
        return f"bosonic s={self.s:g}"

    def to_json(self) -> dict:
        out = {"bath": self.kind, "gamma": self.gamma}
        if self.is_bosonic:
            out["s"] = self.s
        return out


def parse_ohmicity(s) -> float:
    """Accept a number or the string ``"1+"`` (right limit at 1)."""
    if isinstance(s, str):
        s = s.strip()
        if s == "1+":
            return 1.0 + ONE_PLUS
        s = float(s)
    return float(s)


def load_bath(source) -> BathModel:
    obj = _load_json(source)
    kind = obj.get("bath", FERMIONIC)
    gamma = float(obj.get("gamma", 1.0))
    if kind == BOSONIC:
        return BathModel.bosonic(obj["s"], gamma)
    return BathModel(kind, gamma)


def _split(x):
    # |x|, exp(-|x|) and 1 - exp(-|x|) without overflow
    a = np.abs(x)
    q = np.exp(-a)
    d = -np.expm1(-a)
    return a, q, d


def rate(bath: BathModel, x):
    """Dimensionless jump rate for an energy change ``x = beta * (eps_j - eps_i)``.

    Fermionic: ``1 / (1 + e^x)``. Bosonic: ``|x|^s / |e^x - 1|``, which is 0
    at ``x = 0`` for ``s > 1``.
    """
    x = np.asarray(x, dtype=float)
    if not bath.is_bosonic:
        return expit(-x)
    a, q, d = _split(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        # x > 0: a^s q / d ; x < 0: a^s / d
        out = np.where(x > 0, q, 1.0) * a ** (bath.s - 1.0) * (a / d)
    return np.where(a == 0, 0.0, out)


def physical_rate(bath: BathModel, energy_change, temperature: float):
    """Rate in time units for an energy change at temperature ``T``."""
    r = rate(bath, np.asarray(energy_change, dtype=float) / temperature)
    return bath.gamma * temperature ** bath.temperature_exponent * r


def rate_fi_kernel(bath: BathModel, x):
    """Per-pair FI summand ``|d_beta Gamma|^2 / Gamma`` in dimensionless form.

    Fermionic: ``x^2 e^{2x} / (1 + e^x)^3``.
    Bosonic: ``|x|^{2+s} e^{2x} / |e^x - 1|^3``.
    Both vanish at ``x = 0``.
    """
    x = np.asarray(x, dtype=float)
    a, q, d = _split(x)
    if not bath.is_bosonic:
        # e^{2x}/(1+e^x)^3 -> x>0: q/(1+q)^3, x<0: q^2/(1+q)^3
        g = np.where(x > 0, q, q * q) / (1.0 + q) ** 3
        return a * a * g
    with np.errstate(divide="ignore", invalid="ignore"):
        # |x|^{s-1} (|x|/d)^3 keeps tiny gaps from underflowing to 0/0
        out = a ** (bath.s - 1.0) * (a / d) ** 3 * np.where(x > 0, q, q * q)
    return np.where(a == 0, 0.0, out)


def rate_fi_kernel_derivative(bath: BathModel, x):
    """d/dx of :func:`rate_fi_kernel`, used by gradient-based searches."""
    x = np.asarray(x, dtype=float)
    k = rate_fi_kernel(bath, x)
    a = np.abs(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        if not bath.is_bosonic:
            n = expit(-x)
            # d log k / dx = 2/x + 2 - 3(1 - n)
            dlog = 2.0 / x + 2.0 - 3.0 * (1.0 - n)
        else:
            # d log k / dx = (2+s)/x + 2 - 3 / (1 - e^{-x})
            dlog = (2.0 + bath.s) / x + 2.0 - 3.0 / (-np.expm1(-x))
        out = k * dlog
    return np.where(a == 0, 0.0, out)


def generator(spec: EnergySpectrum, bath: BathModel, temperature: float = 1.0) -> np.ndarray:
    """Rate matrix ``Gamma[i, j]`` (jump rate i -> j) for the spectrum.

    Levels are read as energies at temperature ``temperature``; with the
    default ``T = 1`` they are the dimensionless ``x_i`` and the matrix is in
    units of ``gamma``. Rows sum to zero and detailed balance holds.
    """
    levels = spec.levels
    gap = (levels[None, :] - levels[:, None]) / temperature
    if bath.is_bosonic and np.unique(levels).size < levels.size:
        warnings.warn(
            "degenerate levels in a bosonic bath do not exchange population",
            DegenerateBosonicWarning,
            stacklevel=2,
        )
    g = bath.gamma * temperature ** bath.temperature_exponent * rate(bath, gap)
    np.fill_diagonal(g, 0.0)
    np.fill_diagonal(g, -g.sum(axis=1))
    return g
