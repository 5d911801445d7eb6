"""Fisher information, optimal spectra and temperature estimation for
continuously monitored N-level thermometers."""
from ._backend import NAME as BACKEND
from .bath import BathModel, generator, load_bath, rate, rate_fi_kernel
from .fisher import (
    empirical_fi_rate,
    equilibrium_optimum,
    fi_rate_asymptotic,
    fi_rate_exact,
    fi_rate_two_level,
    reset_bound,
)
from .spectrum import EnergySpectrum, TwoLevelAnsatz, equilibrium_distribution, load_spectrum, make_two_level

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BathModel",
    "EnergySpectrum",
    "TwoLevelAnsatz",
    "empirical_fi_rate",
    "equilibrium_distribution",
    "equilibrium_optimum",
    "fi_rate_asymptotic",
    "fi_rate_exact",
    "fi_rate_two_level",
    "generator",
    "load_bath",
    "load_spectrum",
    "make_two_level",
    "rate",
    "rate_fi_kernel",
    "reset_bound",
]
