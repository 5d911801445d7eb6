"""Exact simulation of the monitored jump process and its statistics.

Level values handed to the simulator are energies in units where
``k_B = 1``; rates are evaluated at ``x = energy / T``. At ``T = 1`` the
levels are the dimensionless ``x_i`` themselves.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, asdict

import numpy as np

from . import _backend
from .bath import BathModel, generator, physical_rate
from .errors import AbsorbingStateError, DomainError, PartitionMismatchError, TrajectoryOverflowError
from .spectrum import EnergySpectrum, TwoLevelAnsatz

__all__ = [
    "Trajectory",
    "ObservationSequence",
    "SufficientStats",
    "simulate_gillespie",
    "simulate_stats",
    "simulate_coarse_stats",
    "observe",
    "sufficient_stats",
    "coarse_rates",
    "manifold_labels",
    "write_trajectory",
    "read_trajectory",
    "write_stats",
    "read_stats",
    "MAX_JUMPS",
]

MAX_JUMPS = 10_000_000
BLOCK = 4096


@dataclass(frozen=True)
class Trajectory:
    """Jump record: ``states[k]`` is occupied from ``times[k]`` to ``times[k+1]``."""

    times: np.ndarray
    states: np.ndarray
    tau: float
    spectrum: EnergySpectrum | None = None

    @property
    def initial_state(self) -> int:
        return int(self.states[0])

    @property
    def n_jumps(self) -> int:
        return self.times.size - 1

    def state_at(self, t):
        idx = np.searchsorted(self.times, t, side="right") - 1
        return self.states[np.clip(idx, 0, None)]

    def dwell_times(self) -> np.ndarray:
        return np.diff(np.append(self.times, self.tau))


@dataclass(frozen=True)
class ObservationSequence:
    times: np.ndarray
    samples: np.ndarray

    @property
    def m(self) -> int:
        return self.samples.size - 1


@dataclass(frozen=True)
class SufficientStats:
    """Manifold-crossing counts and ground-manifold time of a record.

    ``k`` counts ground -> excited jumps, ``l`` excited -> ground jumps,
    ``tau0`` is the time spent in the ground manifold and ``tau`` the
    horizon.
    """

    k: int
    l: int  # noqa: E741
    tau0: float
    tau: float

    def __post_init__(self):
        if self.k < 0 or self.l < 0:
            raise DomainError("jump counts must be non-negative")
        if not 0 <= self.tau0 <= self.tau:
            raise DomainError("need 0 <= tau0 <= tau")

    def to_json(self) -> dict:
        return asdict(self)


def _cum_rates(spec, bath, temperature):
    g = generator(spec, bath, temperature)
    np.fill_diagonal(g, 0.0)
    if np.any(g.sum(axis=1) <= 0):
        raise AbsorbingStateError("a level has zero total exit rate")
    return np.ascontiguousarray(np.cumsum(g, axis=1))


def _initial_state(initial, spec, bath, temperature, rng):
    if initial == "thermal":
        x = spec.levels / temperature
        w = np.exp(-(x - x.min()))
        return int(rng.choice(spec.n, p=w / w.sum()))
    idx = int(initial)
    if not 0 <= idx < spec.n:
        raise DomainError(f"initial state {idx} out of range")
    return idx


def simulate_gillespie(spec: EnergySpectrum, bath: BathModel, temperature: float, tau: float,
                       seed=None, initial="thermal", max_jumps: int = MAX_JUMPS,
                       backend=None) -> Trajectory:
    """Exact continuous-time jump sampling (direct method).

    ``seed`` may be an int, ``SeedSequence`` or ``Generator``. The initial
    state is drawn first, then standard exponential and uniform draws are
    consumed in fixed blocks, one of each per event, so the trajectory is a
    function of the seed alone and identical across backends.
    """
    if not tau > 0:
        raise DomainError("tau must be positive")
    core = _backend.get(backend)
    cum = _cum_rates(spec, bath, temperature)
    rng = np.random.default_rng(seed)
    state = _initial_state(initial, spec, bath, temperature, rng)
    cap = min(BLOCK, max_jumps)
    times = np.empty(cap + 1)
    states = np.empty(cap + 1, dtype=np.int64)
    times[0], states[0] = 0.0, state
    n_out, t = 1, 0.0
    while True:
        e = rng.standard_exponential(BLOCK)
        u = rng.random(BLOCK)
        pos = 0
        while pos < BLOCK:
            if n_out == times.size:
                if times.size > max_jumps + 1:
                    raise TrajectoryOverflowError(f"more than {max_jumps} jumps before tau")
                grow = min(times.size * 2, max_jumps + 2)
                times = np.resize(times, grow)
                states = np.resize(states, grow)
            used, n_out, state, t, done = core.simulate_block(
                cum, state, t, tau, e[pos:], u[pos:], times, states, n_out
            )
            pos += used
            if done:
                if n_out - 1 > max_jumps:
                    raise TrajectoryOverflowError(f"more than {max_jumps} jumps before tau")
                return Trajectory(times[:n_out].copy(), states[:n_out].copy(), float(tau), spec)


def manifold_labels(spec: EnergySpectrum, ansatz: TwoLevelAnsatz | None = None) -> np.ndarray:
    """Label each level 0 (lower manifold) or 1 (upper manifold).

    The spectrum must take exactly two values; with an ``ansatz`` the
    lower value must have multiplicity ``ansatz.n0`` and the total must be
    ``ansatz.n``.
    """
    u, counts = spec.grouped()
    if u.size != 2:
        raise PartitionMismatchError("spectrum is not two-valued")
    if ansatz is not None and (spec.n != ansatz.n or counts[0] != ansatz.n0):
        raise PartitionMismatchError(
            f"spectrum has {counts[0]} of {spec.n} levels at the bottom, ansatz expects "
            f"{ansatz.n0} of {ansatz.n}"
        )
    return (spec.levels == u[1]).astype(np.int64)


def _run_stats(core, cum, manifold, state, tau, rng):
    acc = np.zeros(4)
    t = 0.0
    while True:
        e = rng.standard_exponential(BLOCK)
        u = rng.random(BLOCK)
        pos = 0
        while pos < BLOCK:
            used, state, t, done = core.stats_block(cum, manifold, state, t, tau, e[pos:], u[pos:], acc)
            pos += used
            if done:
                return SufficientStats(int(acc[0]), int(acc[1]), float(acc[2]), float(tau))


def simulate_stats(spec: EnergySpectrum, bath: BathModel, temperature: float, tau: float,
                   seed=None, initial="thermal", ansatz: TwoLevelAnsatz | None = None,
                   backend=None) -> SufficientStats:
    """Stream a full N-level simulation straight into sufficient statistics.

    Nothing but the running counts is stored, so long horizons are cheap
    in memory.
    """
    if not tau > 0:
        raise DomainError("tau must be positive")
    core = _backend.get(backend)
    manifold = manifold_labels(spec, ansatz)
    cum = _cum_rates(spec, bath, temperature)
    rng = np.random.default_rng(seed)
    state = _initial_state(initial, spec, bath, temperature, rng)
    return _run_stats(core, cum, manifold, state, tau, rng)


def simulate_coarse_stats(ansatz: TwoLevelAnsatz, bath: BathModel, temperature: float, tau: float,
                          seed=None, initial="thermal", epsilon: float | None = None,
                          backend=None) -> SufficientStats:
    """Simulate the two-state manifold chain with :func:`coarse_rates`.

    For a two-valued spectrum this has the same law of ``(k, l, tau0)`` as
    the full N-level simulation. ``initial`` is ``"thermal"`` or a manifold
    index (0 ground, 1 excited).
    """
    if not tau > 0:
        raise DomainError("tau must be positive")
    core = _backend.get(backend)
    up, down = coarse_rates(ansatz, bath, temperature, epsilon)
    if up <= 0 or down <= 0:
        raise AbsorbingStateError("a manifold has zero exit rate")
    cum = np.array([[0.0, up], [down, down]])
    rng = np.random.default_rng(seed)
    if initial == "thermal":
        state = int(rng.random() >= down / (up + down))
    else:
        state = int(initial)
    return _run_stats(core, cum, np.array([0, 1], dtype=np.int64), state, tau, rng)


def coarse_rates(ansatz: TwoLevelAnsatz, bath: BathModel, temperature: float = 1.0,
                 epsilon: float | None = None):
    """Aggregate manifold exit rates ``((n - n0) G01, n0 G10)``.

    ``G01``/``G10`` are the single-pair up/down rates for the gap energy
    ``epsilon`` (default ``ansatz.x``) at temperature ``temperature``.
    """
    eps = ansatz.x if epsilon is None else epsilon
    g01 = float(physical_rate(bath, eps, temperature))
    g10 = float(physical_rate(bath, -eps, temperature))
    return ansatz.n_excited * g01, ansatz.n0 * g10


def observe(traj: Trajectory, m: int) -> ObservationSequence:
    """Sample the trajectory at ``t_k = k tau / m``, ``k = 0..m``.

    The sample at ``t_k`` is the state entered at or before ``t_k``.
    """
    if m < 1:
        raise DomainError("m must be at least 1")
    t = np.arange(m + 1) * (traj.tau / m)
    return ObservationSequence(t, traj.state_at(t))


def sufficient_stats(traj: Trajectory, ansatz: TwoLevelAnsatz | None = None,
                     spectrum: EnergySpectrum | None = None) -> SufficientStats:
    """Coarse-grain a trajectory on a two-valued spectrum into ``(k, l, tau0)``.

    Jumps inside a manifold are ignored.
    """
    spec = spectrum if spectrum is not None else traj.spectrum
    if spec is None:
        raise PartitionMismatchError("trajectory carries no spectrum")
    man = manifold_labels(spec, ansatz)[traj.states]
    step = np.diff(man)
    dwell = traj.dwell_times()
    return SufficientStats(
        int(np.count_nonzero(step == 1)),
        int(np.count_nonzero(step == -1)),
        float(dwell[man == 0].sum()),
        float(traj.tau),
    )


def _spec_hash(spec):
    if spec is None:
        return None
    return hashlib.sha256(spec.levels.tobytes()).hexdigest()[:16]


def write_trajectory(traj: Trajectory, path, meta: dict | None = None):
    """Write JSON lines: a header object, then one ``{"t", "state"}`` per record."""
    header = {"type": "header", "tau": traj.tau, "n_records": int(traj.times.size),
              "spec_hash": _spec_hash(traj.spectrum)}
    if traj.spectrum is not None:
        header["levels"] = traj.spectrum.levels.tolist()
    if meta:
        header.update(meta)
    with open(path, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for t, s in zip(traj.times.tolist(), traj.states.tolist()):
            fh.write(json.dumps({"t": t, "state": s}) + "\n")


def read_trajectory(path) -> tuple[Trajectory, dict]:
    with open(path) as fh:
        header = json.loads(fh.readline())
        rows = [json.loads(line) for line in fh if line.strip()]
    times = np.array([r["t"] for r in rows], dtype=float)
    states = np.array([r["state"] for r in rows], dtype=np.int64)
    spec = EnergySpectrum(header["levels"], canonical=False) if "levels" in header else None
    return Trajectory(times, states, float(header["tau"]), spec), header


def write_stats(stats: SufficientStats, path, meta: dict | None = None):
    obj = stats.to_json()
    if meta:
        obj = {**obj, "meta": meta}
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True)
        fh.write("\n")


def read_stats(source) -> SufficientStats:
    from .spectrum import _load_json

    obj = _load_json(source)
    return SufficientStats(int(obj["k"]), int(obj["l"]), float(obj["tau0"]), float(obj["tau"]))
