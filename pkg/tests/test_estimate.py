import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from cmthermo.bath import BathModel, physical_rate
from cmthermo.errors import DomainError, NoJumpsError
from cmthermo.estimate import (
    EstimationConfig,
    crb_benchmark,
    expected_fi,
    fi_score_variance_mc,
    log_likelihood,
    mle,
    mle_bosonic,
    mle_fermionic,
    score,
)
from cmthermo.fisher import dimensional_fi, fi_rate_two_level
from cmthermo.spectrum import TwoLevelAnsatz
from cmthermo.trajectory import SufficientStats, coarse_rates, simulate_coarse_stats

FERMI = BathModel.fermionic()
BOSE = BathModel.bosonic(2)


def oracle_log_likelihood(stats, cfg, ts):
    # written out from the manifold exit rates, vectorized over temperature
    a = cfg.ansatz
    up = a.n_excited * physical_rate(cfg.bath, cfg.epsilon, ts)
    down = a.n0 * physical_rate(cfg.bath, -cfg.epsilon, ts)
    return stats.k * np.log(up) + stats.l * np.log(down) - up * stats.tau0 - down * (stats.tau - stats.tau0)


def grid_argmax(stats, cfg):
    # log-spaced scan, then a bounded refinement between the grid neighbours
    ts = cfg.epsilon * np.logspace(-3, 3, 10_000)
    with np.errstate(divide="ignore"):
        i = int(np.argmax(oracle_log_likelihood(stats, cfg, ts)))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, ts.size - 1)]
    res = minimize_scalar(lambda t: -float(oracle_log_likelihood(stats, cfg, t)), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-10 * hi})
    return res.x


def random_cases(bath, count, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(2, 200))
        n0 = int(rng.integers(1, n))
        eps = float(rng.uniform(0.3, 6.0))
        t = float(rng.uniform(0.3, 4.0))
        cfg = EstimationConfig(TwoLevelAnsatz(n, n0, eps), bath)
        tau = float(rng.uniform(20, 2000)) / max(sum(_rates(cfg, t)), 1e-3)
        st = simulate_coarse_stats(cfg.ansatz, bath, t, tau, rng.integers(2**32))
        if st.k + st.l == 0 or not mle(st, cfg).valid:
            continue
        out.append((st, cfg))
    return out


def _rates(cfg, t):
    return coarse_rates(cfg.ansatz, cfg.bath, t, cfg.epsilon)


@pytest.mark.parametrize("bath", [FERMI, BOSE, BathModel.bosonic("1+"), BathModel.bosonic(3)],
                         ids=["fermionic", "bosonic2", "bosonic1+", "bosonic3"])
def test_mle_equals_grid_argmax(bath):
    for st, cfg in random_cases(bath, 100 if bath in (FERMI, BOSE) else 25, seed=1):
        r = mle(st, cfg)
        assert r.valid
        assert math.isclose(r.t_hat, grid_argmax(st, cfg), rel_tol=1e-3)


def test_mle_is_stationary_point():
    for st, cfg in random_cases(FERMI, 10, 2) + random_cases(BOSE, 10, 3):
        r = mle(st, cfg)
        scale = abs(st.k) / r.t_hat + 1.0
        assert abs(score(st, cfg, r.t_hat)) < 1e-6 * scale


def test_zeta_weighting_adjudicated():
    # weighting the excited-manifold time by n0 maximizes the likelihood; by n does not
    cases = random_cases(BOSE, 100, 4)
    good = sum(math.isclose(mle_bosonic(s, c, "n0").t_hat, grid_argmax(s, c), rel_tol=1e-3) for s, c in cases)
    bad = 0
    for s, c in cases:
        r = mle_bosonic(s, c, "n")
        bad += r.valid and math.isclose(r.t_hat, grid_argmax(s, c), rel_tol=1e-3)
    assert good == len(cases)
    assert bad <= 0.1 * len(cases)


@pytest.mark.parametrize("bath", [FERMI, BOSE], ids=["fermionic", "bosonic"])
def test_scale_equivariance(bath):
    # rates at (c eps, c T) are c^{exp} times the rates at (eps, T), so rescaled clocks give T_hat -> c T_hat
    st, cfg = random_cases(bath, 1, 5)[0]
    c = 3.7
    cfg2 = EstimationConfig(cfg.ansatz, bath, cfg.epsilon * c)
    time_scale = c ** bath.temperature_exponent
    st2 = SufficientStats(st.k, st.l, st.tau0 / time_scale, st.tau / time_scale)
    assert math.isclose(mle(st2, cfg2).t_hat, c * mle(st, cfg).t_hat, rel_tol=1e-10)


def test_fermionic_invalid_when_excited_dominates():
    cfg = EstimationConfig(TwoLevelAnsatz(2, 1, 1.0), FERMI)
    # spends almost all time excited with many up-jumps: implies n >= 1/2
    st = SufficientStats(50, 50, 1.0, 100.0)
    assert not mle_fermionic(st, cfg).valid


def test_no_jumps_raises():
    cfg = EstimationConfig(TwoLevelAnsatz(4, 1, 1.0), BOSE)
    with pytest.raises(NoJumpsError):
        mle(SufficientStats(0, 0, 5.0, 5.0), cfg)


def test_log_likelihood_rejects_bad_temperature():
    cfg = EstimationConfig(TwoLevelAnsatz(4, 1, 1.0), FERMI)
    with pytest.raises(DomainError):
        log_likelihood(SufficientStats(1, 1, 1.0, 2.0), cfg, 0.0)


def test_score_matches_likelihood_derivative():
    for bath in (FERMI, BOSE):
        cfg = EstimationConfig(TwoLevelAnsatz(20, 4, 2.5), bath)
        st = SufficientStats(30, 29, 40.0, 100.0)
        h = 1e-6
        fd = (log_likelihood(st, cfg, 1.3 + h) - log_likelihood(st, cfg, 1.3 - h)) / (2 * h)
        assert math.isclose(score(st, cfg, 1.3), fd, rel_tol=1e-6)


def test_expected_fi_dimensional():
    cfg = EstimationConfig(TwoLevelAnsatz(64, 12, 2.0), FERMI)
    t = 0.8
    want = dimensional_fi(fi_rate_two_level(TwoLevelAnsatz(64, 12, 2.0 / t), FERMI), FERMI, t, 50.0)
    assert expected_fi(cfg, t, 50.0) == pytest.approx(want)


def test_score_variance_small_run():
    cfg = EstimationConfig(TwoLevelAnsatz(16, 3, 2.97), FERMI)
    r = fi_score_variance_mc(cfg, 1.0, 1e3, replicas=400, seed=1)
    want = expected_fi(cfg, 1.0, 1e3)
    assert abs(r.fi - want) < 4 * r.stderr
    assert abs(r.mean_score) < 4 * r.mean_score_stderr


def test_crb_small_run_and_determinism():
    cfg = EstimationConfig(TwoLevelAnsatz(16, 3, 2.97), FERMI)
    a = crb_benchmark(cfg, 1.0, 1e4, replicas=200, seed=2)
    b = crb_benchmark(cfg, 1.0, 1e4, replicas=200, seed=2, workers=2)
    assert a == b
    assert a.invalid_fraction < 0.01
    assert 0.6 < a.ratio < 1.5
