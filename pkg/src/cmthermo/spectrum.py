"""Probe energy structures and their Gibbs populations.

Energies are dimensionless, ``x_i = beta * eps_i`` with ``k_B = 1``.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import InvalidDegeneracyError, InvalidGapError, DomainError

__all__ = [
    "EnergySpectrum",
    "TwoLevelAnsatz",
    "make_two_level",
    "perturb_gaussian",
    "equilibrium_distribution",
    "to_dimensionless",
    "from_dimensionless",
    "load_spectrum",
]


class EnergySpectrum:
    """Immutable list of level energies.

    Levels are stored sorted ascending unless ``canonical=False``, in which
    case input order is kept so that level indices stay meaningful as
    trajectory state labels. ``index_map[k]`` is the input position of
    stored level ``k``.
    """

    __slots__ = ("_levels", "_index_map")

    def __init__(self, levels, canonical: bool = True):
        arr = np.array(levels, dtype=float).ravel()
        if arr.size < 2:
            raise DomainError("a spectrum needs at least two levels")
        if not np.all(np.isfinite(arr)):
            raise DomainError("spectrum levels must be finite")
        if canonical:
            order = np.argsort(arr, kind="stable")
        else:
            order = np.arange(arr.size)
        arr = arr[order]
        arr.setflags(write=False)
        order.setflags(write=False)
        self._levels = arr
        self._index_map = order

    @property
    def levels(self) -> np.ndarray:
        return self._levels

    @property
    def index_map(self) -> np.ndarray:
        return self._index_map

    @property
    def n(self) -> int:
        return self._levels.size

    def __len__(self):
        return self._levels.size

    def __repr__(self):
        return f"EnergySpectrum(n={self.n}, levels={np.array2string(self._levels, threshold=8)})"

    def __eq__(self, other):
        if not isinstance(other, EnergySpectrum):
            return NotImplemented
        return np.array_equal(self._levels, other._levels)

    __hash__ = None

    def shifted(self, c: float) -> "EnergySpectrum":
        return EnergySpectrum(self._levels + c, canonical=False)

    def scaled(self, c: float) -> "EnergySpectrum":
        return EnergySpectrum(self._levels * c, canonical=False)

    def grouped(self):
        """Distinct energies and their multiplicities (exact equality)."""
        return np.unique(self._levels, return_counts=True)

    def to_json(self) -> dict:
        return {"levels": self._levels.tolist()}


@dataclass(frozen=True)
class TwoLevelAnsatz:
    """``n0`` ground levels at 0 and ``n - n0`` excited levels at gap ``x``."""

    n: int
    n0: int
    x: float

    def __post_init__(self):
        if not 1 <= self.n0 <= self.n - 1:
            raise InvalidDegeneracyError(
                f"ground degeneracy must lie in [1, {self.n - 1}], got {self.n0}"
            )
        if not (self.x > 0 and math.isfinite(self.x)):
            raise InvalidGapError(f"gap must be positive and finite, got {self.x}")

    @property
    def n_excited(self) -> int:
        return self.n - self.n0

    @property
    def fraction(self) -> float:
        return self.n0 / self.n

    def to_spectrum(self) -> EnergySpectrum:
        levels = np.concatenate([np.zeros(self.n0), np.full(self.n_excited, float(self.x))])
        return EnergySpectrum(levels, canonical=False)

    def with_gap(self, x: float) -> "TwoLevelAnsatz":
        return TwoLevelAnsatz(self.n, self.n0, x)

    def to_json(self) -> dict:
        return {"two_level": {"n": self.n, "n0": self.n0, "x": self.x}}


def make_two_level(n: int, n0: int, x: float) -> EnergySpectrum:
    return TwoLevelAnsatz(int(n), int(n0), float(x)).to_spectrum()


def perturb_gaussian(base: TwoLevelAnsatz, sigma: float, seed=None) -> EnergySpectrum:
    """Spread both manifolds of ``base`` with independent Gaussian noise.

    Ground levels are drawn from N(0, sigma^2) and excited levels from
    N(x, sigma^2). ``seed`` may be an int, a ``SeedSequence`` or a
    ``Generator``; the draw order is fixed (ground block first), so a given
    seed always produces the same spectrum. ``sigma == 0`` returns the base
    spectrum exactly.
    """
    if sigma < 0:
        raise DomainError("sigma must be non-negative")
    rng = np.random.default_rng(seed)
    ground = rng.normal(0.0, 1.0, size=base.n0) * sigma
    excited = base.x + rng.normal(0.0, 1.0, size=base.n_excited) * sigma
    return EnergySpectrum(np.concatenate([ground, excited]))


def equilibrium_distribution(spec: EnergySpectrum) -> np.ndarray:
    """Gibbs populations ``exp(-x_i) / Z`` in the spectrum's stored order."""
    x = spec.levels
    w = np.exp(-(x - x.min()))
    return w / w.sum()


def to_dimensionless(energy, temperature: float):
    """Map energies to ``x = eps / T`` (``k_B = 1``)."""
    if temperature <= 0:
        raise DomainError("temperature must be positive")
    return np.asarray(energy, dtype=float) / temperature


def from_dimensionless(x, temperature: float):
    if temperature <= 0:
        raise DomainError("temperature must be positive")
    return np.asarray(x, dtype=float) * temperature


def load_spectrum(source) -> EnergySpectrum:
    """Read a spectrum from a dict, a JSON string or a path.

    Accepted forms are ``{"levels": [...]}`` and
    ``{"two_level": {"n": N, "n0": N0, "x": gap}}``.
    """
    obj = _load_json(source)
    if "levels" in obj:
        return EnergySpectrum(obj["levels"])
    if "two_level" in obj:
        tl = obj["two_level"]
        return make_two_level(tl["n"], tl["n0"], tl["x"])
    raise KeyError("spectrum JSON needs a 'levels' or 'two_level' key")


def _load_json(source) -> dict:
    if isinstance(source, dict):
        return source
    if isinstance(source, (str, os.PathLike)) and str(source).lstrip().startswith("{"):
        return json.loads(str(source))
    with open(source) as fh:
        return json.load(fh)
