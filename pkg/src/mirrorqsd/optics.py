"""Half-wave-plate settings for the walk coins and a photon-counting emulator."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .model import IDENTITY, Ensemble, Povm, born_probabilities
from .strategies import Strategy
from .walk import CoinSchedule, OutcomeMap, walk_outcome_probabilities

PLATE_TOLERANCE = 1e-12


class NeedsQuarterWavePlateError(ValueError):
    """A coin is not reachable with a single half-wave plate."""


def normalize_angle(h: float) -> float:
    """Map a plate angle into (-pi/2, pi/2]; plates are pi-periodic."""
    h = math.fmod(h, math.pi)
    if h <= -math.pi / 2:
        h += math.pi
    elif h > math.pi / 2:
        h -= math.pi
    return h


@dataclass(frozen=True)
class WaveplateSetting:
    """Fast-axis angle of a plate, or ``None`` when no plate is needed."""

    element_id: str
    angle: float | None

    def __post_init__(self):
        if self.angle is not None:
            object.__setattr__(self, "angle", normalize_angle(float(self.angle)))

    @property
    def active(self) -> bool:
        return self.angle is not None

    def in_units_of_pi(self) -> float | None:
        return None if self.angle is None else self.angle / math.pi


def hwp_matrix(h: float) -> np.ndarray:
    """Jones matrix of a half-wave plate with fast axis at angle ``h``."""
    c, s = math.cos(2.0 * h), math.sin(2.0 * h)
    return np.array([[c, s], [s, -c]], dtype=np.complex128)


def plate_angle(coin: np.ndarray) -> float:
    """Invert :func:`hwp_matrix`.

    Raises ``NeedsQuarterWavePlateError`` if the coin is complex,
    non-symmetric or has determinant other than -1.
    """
    u = np.asarray(coin, dtype=np.complex128)
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    if (
        np.max(np.abs(u.imag)) > PLATE_TOLERANCE
        or abs(u[0, 1] - u[1, 0]) > PLATE_TOLERANCE
        or abs(u[0, 0] + u[1, 1]) > PLATE_TOLERANCE
        or abs(det + 1.0) > PLATE_TOLERANCE
    ):
        raise NeedsQuarterWavePlateError(
            f"coin {u.tolist()} is not a real reflection; an extra quarter-wave plate would be needed"
        )
    return normalize_angle(0.5 * math.atan2(u[0, 1].real, u[0, 0].real))


def preparation_angle(theta_state: float) -> WaveplateSetting:
    """H1 angle turning |0> into cos(t)|0> + sin(t)|1>."""
    if not -math.pi / 2 <= theta_state <= math.pi / 2:
        raise ValueError(f"state angle {theta_state!r} outside [-pi/2, pi/2]")
    return WaveplateSetting("H1", theta_state / 2.0)


def preparation_settings(ensemble: Ensemble) -> list[WaveplateSetting]:
    """H1 setting for each (real) state of the ensemble."""
    out = []
    for psi in ensemble.states:
        out.append(preparation_angle(math.atan2(psi[1].real, psi[0].real)))
    return out


def angles_for_schedule(schedule: CoinSchedule) -> list[WaveplateSetting]:
    """Plate setting for every coin in the schedule, in layer order.

    Identity coins become inactive settings (angle ``None``). Unnamed
    coins are labelled ``"L<layer>@x<position>"``.
    """
    settings = []
    for n, layer in enumerate(schedule.steps):
        for x, coin in sorted(layer.coins.items()):
            name = schedule.roles.get((n, x), f"L{n + 1}@x{x:+d}")
            if np.max(np.abs(coin - IDENTITY)) <= PLATE_TOLERANCE:
                settings.append(WaveplateSetting(name, None))
            else:
                settings.append(WaveplateSetting(name, plate_angle(coin)))
    return settings


# --------------------------------------------------------------------------
# photon counting
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PhotonCountRecord:
    """Joint counts of (true state, outcome) for one run.

    ``counts[i, k]`` is the number of photons prepared in state i + 1 that
    registered outcome ``labels[k]``.
    """

    counts: np.ndarray
    total: int
    run_id: int
    seed: int
    labels: tuple = ()
    positions: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.counts.sum()) != self.total:
            raise ValueError("counts do not sum to the photon total")

    def outcome_counts(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    def rows(self) -> list[dict]:
        out = []
        for i in range(self.counts.shape[0]):
            for k, label in enumerate(self.labels):
                row = {
                    "run": self.run_id,
                    "seed": self.seed,
                    "N": self.total,
                    "true_state": i + 1,
                    "outcome": label,
                    "count": int(self.counts[i, k]),
                }
                if k in self.positions:
                    row["position"] = self.positions[k]
                out.append(row)
        return out


def write_jsonl(records: Iterable[PhotonCountRecord], path) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        for rec in records:
            for row in rec.rows():
                fh.write(json.dumps(row) + "\n")
    return path


def read_jsonl(path) -> list[PhotonCountRecord]:
    rows = [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]
    by_run: dict[int, list[dict]] = {}
    for row in rows:
        by_run.setdefault(row["run"], []).append(row)
    records = []
    for run, group in sorted(by_run.items()):
        labels = tuple(dict.fromkeys(r["outcome"] for r in group))
        n_states = max(r["true_state"] for r in group)
        counts = np.zeros((n_states, len(labels)), dtype=np.int64)
        positions = {}
        for r in group:
            k = labels.index(r["outcome"])
            counts[r["true_state"] - 1, k] = r["count"]
            if "position" in r:
                positions[k] = r["position"]
        records.append(
            PhotonCountRecord(counts, group[0]["N"], run, group[0]["seed"], labels, positions)
        )
    return records


def likelihood_matrix(ensemble: Ensemble, povm: Povm) -> np.ndarray:
    """Rows <psi_i|E_k|psi_i>, clamped and renormalized onto the simplex."""
    rows = np.array([np.clip(born_probabilities(psi, povm), 0.0, 1.0) for psi in ensemble.states])
    return rows / rows.sum(axis=1, keepdims=True)


def walk_likelihood_matrix(
    ensemble: Ensemble, schedule: CoinSchedule, outcome_map: OutcomeMap, n_outcomes: int
) -> np.ndarray:
    states = np.stack(ensemble.states, axis=1)
    probs = walk_outcome_probabilities(schedule, outcome_map, n_outcomes, states).T
    probs = np.clip(probs, 0.0, 1.0)
    return probs / probs.sum(axis=1, keepdims=True)


def run_generator(seed: int, grid_index: int, run_index: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, grid point, run)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, grid_index, run_index])))


def simulate_counts(
    ensemble: Ensemble,
    povm: Povm,
    outcome_map: OutcomeMap | None = None,
    n_photons: int = 100_000,
    runs: int = 30,
    seed: int = 0,
    *,
    schedule: CoinSchedule | None = None,
    grid_index: int = 0,
) -> list[PhotonCountRecord]:
    """Emulate ``runs`` runs of ``n_photons`` heralded photons each.

    Every photon is prepared in state i with probability p_i and lands on
    outcome k with probability <psi_i|E_k|psi_i>; the joint (i, k) counts
    of a run are therefore one multinomial draw. When ``schedule`` is
    given the outcome probabilities come from simulating the walk through
    ``outcome_map`` instead of from ``povm`` directly.
    """
    if n_photons < 1 or runs < 1:
        raise ValueError("n_photons and runs must be positive")
    if schedule is not None:
        if outcome_map is None:
            raise ValueError("an outcome map is required to read out a walk")
        likelihood = walk_likelihood_matrix(ensemble, schedule, outcome_map, len(povm))
    else:
        likelihood = likelihood_matrix(ensemble, povm)
    joint = ensemble.priors[:, None] * likelihood
    joint = joint.ravel() / joint.sum()
    positions = {} if outcome_map is None else {k: x for x, k in outcome_map.positions.items()}
    records = []
    for run in range(runs):
        rng = run_generator(seed, grid_index, run)
        counts = rng.multinomial(n_photons, joint).reshape(likelihood.shape)
        records.append(PhotonCountRecord(counts, n_photons, run, seed, povm.labels, positions))
    return records


@dataclass(frozen=True)
class ExperimentEstimate:
    mean: float
    std: float
    runs: int
    per_run_values: tuple[float, ...]
    excluded_runs: int = 0


def _summarize(values: Sequence[float], excluded: int) -> ExperimentEstimate:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return ExperimentEstimate(math.nan, math.nan, 0, (), excluded)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return ExperimentEstimate(float(arr.mean()), std, int(arr.size), tuple(arr.tolist()), excluded)


def estimate_figure_of_merit(records: Sequence[PhotonCountRecord], strategy: Strategy) -> ExperimentEstimate:
    """Per-run success rate (MED) or conditional confidence for state 1 (MCD).

    MCD runs with no outcome-1 clicks are dropped and counted in
    ``excluded_runs``.
    """
    if not records:
        raise ValueError("no records to estimate from")
    strategy = Strategy(strategy)
    values = []
    excluded = 0
    for rec in records:
        if strategy is Strategy.MED:
            hits = sum(int(rec.counts[i, rec.labels.index(i + 1)]) for i in range(rec.counts.shape[0]))
            values.append(hits / rec.total)
        else:
            k = rec.labels.index(1)
            clicks = int(rec.counts[:, k].sum())
            if clicks == 0:
                excluded += 1
                continue
            values.append(int(rec.counts[0, k]) / clicks)
    if excluded:
        warnings.warn(f"{excluded} run(s) had no outcome-1 clicks and were excluded", RuntimeWarning)
    return _summarize(values, excluded)
