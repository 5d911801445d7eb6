import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sps

from cmthermo import _backend
from cmthermo.bath import BathModel, physical_rate
from cmthermo.errors import (
    AbsorbingStateError,
    DomainError,
    PartitionMismatchError,
    TrajectoryOverflowError,
)
from cmthermo.spectrum import EnergySpectrum, TwoLevelAnsatz
from cmthermo.trajectory import (
    SufficientStats,
    Trajectory,
    coarse_rates,
    manifold_labels,
    observe,
    read_stats,
    read_trajectory,
    simulate_coarse_stats,
    simulate_gillespie,
    simulate_stats,
    sufficient_stats,
    write_stats,
    write_trajectory,
)

FERMI = BathModel.fermionic()
ANSATZ = TwoLevelAnsatz(8, 2, 3.0)
SPEC = ANSATZ.to_spectrum()


def ground_dwell_times(traj, man):
    # completed ground-manifold sojourns, excluding the censored first and last
    lab = man[traj.states]
    change = np.flatnonzero(np.diff(lab)) + 1
    out = []
    for a, b in zip(change[:-1], change[1:]):
        if lab[a] == 0:
            out.append(traj.times[b] - traj.times[a])
    return np.asarray(out)


def test_sufficient_stats_example():
    spec = EnergySpectrum([0.0, 3.0], canonical=False)
    traj = Trajectory(np.array([0.0, 2.0, 5.0]), np.array([0, 1, 0]), 10.0, spec)
    st_ = sufficient_stats(traj)
    assert (st_.k, st_.l, st_.tau0, st_.tau) == (1, 1, 7.0, 10.0)


def test_sufficient_stats_ignores_intra_manifold_jumps():
    spec = EnergySpectrum([0.0, 0.0, 3.0], canonical=False)
    traj = Trajectory(np.array([0.0, 1.0, 4.0, 6.0]), np.array([0, 1, 2, 0]), 9.0, spec)
    st_ = sufficient_stats(traj, TwoLevelAnsatz(3, 2, 3.0))
    assert (st_.k, st_.l, st_.tau0) == (1, 1, 7.0)


def test_observe_grid():
    traj = Trajectory(np.array([0.0, 2.0, 5.0]), np.array([0, 1, 0]), 10.0)
    obs = observe(traj, 5)
    np.testing.assert_allclose(obs.times, [0, 2, 4, 6, 8, 10])
    np.testing.assert_array_equal(obs.samples, [0, 1, 1, 0, 0, 0])
    assert obs.m == 5
    with pytest.raises(DomainError):
        observe(traj, 0)


def test_manifold_labels_checks_partition():
    np.testing.assert_array_equal(manifold_labels(SPEC, ANSATZ), [0, 0] + [1] * 6)
    with pytest.raises(PartitionMismatchError):
        manifold_labels(SPEC, TwoLevelAnsatz(8, 3, 3.0))
    with pytest.raises(PartitionMismatchError):
        manifold_labels(EnergySpectrum([0.0, 1.0, 2.0]))


def test_sufficient_stats_validation():
    with pytest.raises(DomainError):
        SufficientStats(-1, 0, 0.0, 1.0)
    with pytest.raises(DomainError):
        SufficientStats(0, 0, 2.0, 1.0)


@pytest.mark.skipif("compiled" not in _backend.available(), reason="extension not built")
@pytest.mark.filterwarnings("ignore::cmthermo.errors.DegenerateBosonicWarning")
@pytest.mark.parametrize("b", [FERMI, BathModel.bosonic(2)], ids=["fermionic", "bosonic"])
def test_backends_bit_identical(b):
    spec = EnergySpectrum([0.0, 0.3, 1.1, 2.0, 2.05, 4.0])
    a = simulate_gillespie(spec, b, 1.3, 400.0, seed=9, backend="python")
    c = simulate_gillespie(spec, b, 1.3, 400.0, seed=9, backend="compiled")
    assert a.n_jumps > 100
    np.testing.assert_array_equal(a.times, c.times)
    np.testing.assert_array_equal(a.states, c.states)
    s1 = simulate_stats(SPEC, b, 1.0, 500.0, seed=4, backend="python")
    s2 = simulate_stats(SPEC, b, 1.0, 500.0, seed=4, backend="compiled")
    assert s1 == s2
    c1 = simulate_coarse_stats(ANSATZ, b, 1.0, 500.0, seed=4, backend="python")
    c2 = simulate_coarse_stats(ANSATZ, b, 1.0, 500.0, seed=4, backend="compiled")
    assert c1 == c2


def test_streamed_stats_match_stored_trajectory():
    traj = simulate_gillespie(SPEC, FERMI, 1.0, 3000.0, seed=12)
    a = simulate_stats(SPEC, FERMI, 1.0, 3000.0, seed=12)
    b = sufficient_stats(traj, ANSATZ)
    assert (a.k, a.l, a.tau) == (b.k, b.l, b.tau)
    # running sum vs differences of stored jump times
    assert a.tau0 == pytest.approx(b.tau0, rel=1e-12)


@settings(max_examples=30)
@given(seed=st.integers(0, 2**32 - 1), tau=st.floats(1.0, 300.0))
def test_crossings_alternate(seed, tau):
    s = simulate_stats(SPEC, FERMI, 1.0, tau, seed)
    assert abs(s.k - s.l) <= 1
    c = simulate_coarse_stats(ANSATZ, FERMI, 1.0, tau, seed)
    assert abs(c.k - c.l) <= 1


def test_gillespie_time_axis():
    traj = simulate_gillespie(SPEC, FERMI, 1.0, 50.0, seed=1)
    assert traj.times[0] == 0.0
    assert np.all(np.diff(traj.times) > 0)
    assert traj.times[-1] < 50.0
    assert np.all(traj.states[1:] != traj.states[:-1])


def test_occupation_approaches_gibbs():
    spec = EnergySpectrum([0.0, 0.5, 1.5, 2.5])
    traj = simulate_gillespie(spec, FERMI, 1.0, 2e4, seed=0)
    occ = np.bincount(traj.states, weights=traj.dwell_times(), minlength=4) / traj.tau
    p = np.exp(-spec.levels)
    p /= p.sum()
    np.testing.assert_allclose(occ, p, atol=0.01)


@pytest.mark.filterwarnings("ignore::cmthermo.errors.DegenerateBosonicWarning")
@pytest.mark.parametrize("b", [FERMI, BathModel.bosonic(2)], ids=["fermionic", "bosonic"])
def test_manifold_dwell_exponential(b):
    traj = simulate_gillespie(SPEC, b, 1.0, 4e4, seed=2)
    dwell = ground_dwell_times(traj, manifold_labels(SPEC, ANSATZ))
    up, _ = coarse_rates(ANSATZ, b, 1.0)
    assert dwell.size > 200
    assert sps.kstest(dwell, "expon", args=(0, 1 / up)).pvalue > 0.01


def test_coarse_and_full_agree_in_law():
    seeds = np.random.SeedSequence(77).spawn(400)
    full = [simulate_stats(SPEC, FERMI, 1.0, 200.0, s) for s in seeds[:200]]
    coarse = [simulate_coarse_stats(ANSATZ, FERMI, 1.0, 200.0, s) for s in seeds[200:]]
    for key in ("k", "tau0"):
        a = [getattr(x, key) for x in full]
        c = [getattr(x, key) for x in coarse]
        assert sps.ks_2samp(a, c).pvalue > 0.01


def test_coarse_rates_values():
    b = BathModel.bosonic(3, gamma=0.5)
    up, down = coarse_rates(ANSATZ, b, 2.0, epsilon=3.0)
    assert up == pytest.approx(6 * float(physical_rate(b, 3.0, 2.0)))
    assert down == pytest.approx(2 * float(physical_rate(b, -3.0, 2.0)))


def test_overflow_guard():
    with pytest.raises(TrajectoryOverflowError):
        simulate_gillespie(SPEC, FERMI, 1.0, 1e4, seed=0, max_jumps=50)


def test_absorbing_state_rejected():
    # degenerate levels in a bosonic bath never exchange population
    with pytest.warns(UserWarning), pytest.raises(AbsorbingStateError):
        simulate_gillespie(EnergySpectrum([0.0, 0.0]), BathModel.bosonic(2), 1.0, 1.0, seed=0)


def test_initial_state_option():
    traj = simulate_gillespie(SPEC, FERMI, 1.0, 1.0, seed=0, initial=5)
    assert traj.initial_state == 5
    with pytest.raises(DomainError):
        simulate_gillespie(SPEC, FERMI, 1.0, 1.0, seed=0, initial=99)


def test_trajectory_file_roundtrip(tmp_path):
    traj = simulate_gillespie(SPEC, FERMI, 1.0, 100.0, seed=3)
    path = tmp_path / "t.jsonl"
    write_trajectory(traj, path, {"seed": 3})
    back, header = read_trajectory(path)
    assert header["seed"] == 3
    np.testing.assert_array_equal(back.times, traj.times)
    np.testing.assert_array_equal(back.states, traj.states)
    assert back.spectrum == traj.spectrum
    assert sufficient_stats(back, ANSATZ) == sufficient_stats(traj, ANSATZ)


def test_stats_file_roundtrip(tmp_path):
    s = SufficientStats(4, 3, 12.5, 20.0)
    path = tmp_path / "s.json"
    write_stats(s, path, {"note": "x"})
    assert read_stats(path) == s
