"""Temperature estimation from monitored two-level records.

The likelihood of a record on a two-valued spectrum depends on the data
only through ``(k, l, tau0, tau)``. Setting its temperature derivative to
zero gives a quadratic in the bath occupation number, so the maximum
likelihood estimate is available in closed form.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .bath import BathModel
from .errors import DomainError, InvalidRootError, NoJumpsError
from .fisher import dimensional_fi, fi_rate_two_level
from .spectrum import TwoLevelAnsatz
from .trajectory import SufficientStats, coarse_rates, simulate_coarse_stats, simulate_stats

__all__ = [
    "EstimationConfig",
    "MleResult",
    "log_likelihood",
    "score",
    "mle",
    "mle_fermionic",
    "mle_bosonic",
    "CrbReport",
    "crb_benchmark",
    "ScoreReport",
    "fi_score_variance_mc",
    "expected_fi",
]


@dataclass(frozen=True)
class EstimationConfig:
    """Probe layout, bath and physical gap ``epsilon`` (``k_B = 1`` units).

    The coupling ``bath.gamma`` is treated as known.
    """

    ansatz: TwoLevelAnsatz
    bath: BathModel
    epsilon: float | None = None

    def __post_init__(self):
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", float(self.ansatz.x))
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")

    @property
    def known_gamma(self) -> float:
        return self.bath.gamma

    @property
    def kappa(self) -> float:
        """Prefactor of both single-pair rates: ``gamma`` or ``gamma eps^s``."""
        return self.bath.gamma * self.epsilon ** self.bath.temperature_exponent


@dataclass(frozen=True)
class MleResult:
    t_hat: float
    occupation_hat: float
    valid: bool
    log_likelihood_at_hat: float

    def to_json(self) -> dict:
        return {
            "t_hat": self.t_hat,
            "occupation_hat": self.occupation_hat,
            "valid": self.valid,
            "log_likelihood_at_hat": self.log_likelihood_at_hat,
        }


def log_likelihood(stats: SufficientStats, cfg: EstimationConfig, temperature: float) -> float:
    """``k log A + l log B - A tau0 - B (tau - tau0)`` with the manifold exit rates at ``T``."""
    if not temperature > 0:
        raise DomainError("temperature must be positive")
    up, down = coarse_rates(cfg.ansatz, cfg.bath, temperature, cfg.epsilon)
    return float(
        xlogy(stats.k, up) + xlogy(stats.l, down) - up * stats.tau0 - down * (stats.tau - stats.tau0)
    )


def score(stats: SufficientStats, cfg: EstimationConfig, temperature: float) -> float:
    """Temperature derivative of :func:`log_likelihood`."""
    a = cfg.ansatz
    eps, t = cfg.epsilon, temperature
    x = eps / t
    c = eps / (t * t)
    kap = cfg.kappa
    if cfg.bath.is_bosonic:
        n = 1.0 / math.expm1(x)
        dn = n * (n + 1.0) * c
        dlog_up, dlog_down = (n + 1.0) * c, n * c
        d_up, d_down = a.n_excited * kap * dn, a.n0 * kap * dn
    else:
        n = 1.0 / (1.0 + math.exp(x)) if x < 700 else 0.0
        dn = n * (1.0 - n) * c
        dlog_up, dlog_down = (1.0 - n) * c, -n * c
        d_up, d_down = a.n_excited * kap * dn, -a.n0 * kap * dn
    return (
        stats.k * dlog_up
        + stats.l * dlog_down
        - d_up * stats.tau0
        - d_down * (stats.tau - stats.tau0)
    )


def _finish(stats, cfg, n, t_hat, valid):
    ll = log_likelihood(stats, cfg, t_hat) if valid else float("nan")
    return MleResult(float(t_hat), float(n), bool(valid), ll)


def mle_fermionic(stats: SufficientStats, cfg: EstimationConfig) -> MleResult:
    """Closed-form MLE for a fermionic bath.

    With ``n = n_F(eps / T)`` the stationarity condition is
    ``k (1 - n) - l n + xi n (1 - n) = 0``, ``xi = gamma (n0 tau - N tau0)``.
    Exactly one root lies in ``[0, 1]``. ``valid`` is False when the root
    implies ``T <= 0`` or ``T = inf`` (``n = 0`` or ``n >= 1/2``).
    """
    k, l = stats.k, stats.l
    if k + l == 0:
        raise NoJumpsError("no manifold-crossing jumps in the record")
    a = cfg.ansatz
    xi = cfg.kappa * (a.n0 * stats.tau - a.n * stats.tau0)
    b = k + l - xi
    disc = b * b + 4.0 * xi * k
    if disc < 0:
        raise InvalidRootError("negative discriminant")
    if abs(xi) < 1e-9 * (k + l):
        n = k / (k + l)
    elif b > 0:
        n = 2.0 * k / (b + math.sqrt(disc))
    else:
        n = (-b + math.sqrt(disc)) / (2.0 * xi)
    if not 0.0 <= n <= 1.0:
        raise InvalidRootError(f"occupation root {n} outside [0, 1]")
    if n == 0.0:
        return _finish(stats, cfg, n, 0.0, False)
    if n >= 0.5:
        t_hat = math.inf if n == 0.5 else cfg.epsilon / math.log((1.0 - n) / n)
        return _finish(stats, cfg, n, t_hat, False)
    return _finish(stats, cfg, n, cfg.epsilon / math.log((1.0 - n) / n), True)


def _zeta(stats, cfg, form):
    a = cfg.ansatz
    weight = a.n0 if form == "n0" else a.n
    return cfg.kappa * (a.n_excited * stats.tau0 + weight * (stats.tau - stats.tau0))


def mle_bosonic(stats: SufficientStats, cfg: EstimationConfig, zeta_form: str = "n0") -> MleResult:
    """Closed-form MLE for a bosonic bath.

    With ``n = n_B(eps / T)`` the stationarity condition is
    ``k (n + 1) + l n - zeta n (n + 1) = 0`` where
    ``zeta = kappa ((N - n0) tau0 + n0 (tau - tau0))`` and
    ``kappa = gamma eps^s``. The non-negative root is taken.

    ``zeta_form="n"`` swaps the ``n0`` weight on the excited-manifold time
    for ``N``; it exists only to show that this variant does not maximize
    the likelihood.
    """
    k, l = stats.k, stats.l
    if k + l == 0:
        raise NoJumpsError("no manifold-crossing jumps in the record")
    zeta = _zeta(stats, cfg, zeta_form)
    if zeta <= 0:
        if k > 0:
            raise InvalidRootError("no non-negative occupation solves the equation")
        return _finish(stats, cfg, 0.0, 0.0, False)
    b = zeta - k - l
    disc = b * b + 4.0 * zeta * k
    if b > 0:
        n = 2.0 * k / (b + math.sqrt(disc))
    else:
        n = (-b + math.sqrt(disc)) / (2.0 * zeta)
    if n < 0:
        raise InvalidRootError(f"occupation root {n} is negative")
    if n == 0.0:
        return _finish(stats, cfg, n, 0.0, False)
    return _finish(stats, cfg, n, cfg.epsilon / math.log1p(1.0 / n), True)


def mle(stats: SufficientStats, cfg: EstimationConfig) -> MleResult:
    if cfg.bath.is_bosonic:
        return mle_bosonic(stats, cfg)
    return mle_fermionic(stats, cfg)


def expected_fi(cfg: EstimationConfig, temperature: float, tau: float) -> float:
    """Fisher information of a record of length ``tau`` at the true ``T``."""
    a = cfg.ansatz.with_gap(cfg.epsilon / temperature)
    return dimensional_fi(fi_rate_two_level(a, cfg.bath), cfg.bath, temperature, tau)


def _simulate(cfg, temperature, tau, seed, method):
    if method == "coarse":
        return simulate_coarse_stats(cfg.ansatz, cfg.bath, temperature, tau, seed, epsilon=cfg.epsilon)
    if method == "full":
        spec = cfg.ansatz.with_gap(cfg.epsilon).to_spectrum()
        return simulate_stats(spec, cfg.bath, temperature, tau, seed, ansatz=cfg.ansatz)
    raise ValueError(f"unknown simulation method {method!r}")


def _replica_stats(args):
    cfg, temperature, tau, seeds, method = args
    return [_simulate(cfg, temperature, tau, s, method) for s in seeds]


def _simulate_replicas(cfg, temperature, tau, replicas, seed, method, workers):
    seeds = np.random.SeedSequence(seed).spawn(replicas)
    if workers <= 1:
        return _replica_stats((cfg, temperature, tau, seeds, method))
    chunks = np.array_split(np.arange(replicas), workers * 4)
    tasks = [(cfg, temperature, tau, [seeds[i] for i in c], method) for c in chunks if c.size]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(_replica_stats, tasks))
    return [s for part in parts for s in part]


@dataclass(frozen=True)
class CrbReport:
    t_true: float
    mse: float
    crb: float
    ratio: float
    stderr: float
    invalid_fraction: float
    replicas: int
    bias: float

    def to_json(self) -> dict:
        return {
            "t_true": self.t_true,
            "mse": self.mse,
            "crb": self.crb,
            "ratio": self.ratio,
            "stderr": self.stderr,
            "invalid_fraction": self.invalid_fraction,
            "replicas": self.replicas,
            "bias": self.bias,
        }


def crb_benchmark(cfg: EstimationConfig, t_true: float, tau: float, replicas: int = 1000,
                  seed: int = 0, method: str = "coarse", workers: int = 1) -> CrbReport:
    """Compare the MLE's mean squared error with the Cramer-Rao bound.

    Replica ``i`` is simulated from child ``i`` of ``SeedSequence(seed)``.
    ``method="coarse"`` simulates the two-state manifold chain, which has
    the same statistics as the full N-level run (``method="full"``) at a
    fraction of the cost. Records that yield no jumps or an invalid
    estimate are excluded from the MSE and counted in
    ``invalid_fraction``. ``stderr`` is the standard error of ``ratio``.
    """
    if replicas < 100:
        raise DomainError("need at least 100 replicas")
    stats = _simulate_replicas(cfg, t_true, tau, replicas, seed, method, workers)
    est = []
    invalid = 0
    for st in stats:
        try:
            r = mle(st, cfg)
        except NoJumpsError:
            invalid += 1
            continue
        if r.valid:
            est.append(r.t_hat)
        else:
            invalid += 1
    est = np.asarray(est)
    sq = (est - t_true) ** 2
    crb = 1.0 / expected_fi(cfg, t_true, tau)
    mse = float(sq.mean()) if sq.size else float("nan")
    stderr = float(sq.std(ddof=1) / math.sqrt(sq.size) / crb) if sq.size > 1 else float("nan")
    return CrbReport(
        t_true=float(t_true),
        mse=mse,
        crb=crb,
        ratio=mse / crb,
        stderr=stderr,
        invalid_fraction=invalid / replicas,
        replicas=int(replicas),
        bias=float(est.mean() - t_true) if est.size else float("nan"),
    )


@dataclass(frozen=True)
class ScoreReport:
    fi: float
    stderr: float
    mean_score: float
    mean_score_stderr: float
    replicas: int


def fi_score_variance_mc(cfg: EstimationConfig, temperature: float, tau: float, replicas: int = 1000,
                         seed: int = 0, method: str = "coarse", workers: int = 1) -> ScoreReport:
    """Monte Carlo Fisher information as the mean squared score."""
    if replicas < 100:
        raise DomainError("need at least 100 replicas")
    stats = _simulate_replicas(cfg, temperature, tau, replicas, seed, method, workers)
    sc = np.array([score(st, cfg, temperature) for st in stats])
    sq = sc * sc
    root = math.sqrt(replicas)
    return ScoreReport(
        fi=float(sq.mean()),
        stderr=float(sq.std(ddof=1) / root),
        mean_score=float(sc.mean()),
        mean_score_stderr=float(sc.std(ddof=1) / root),
        replicas=int(replicas),
    )
