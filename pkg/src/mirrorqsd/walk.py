"""One-dimensional discrete-time quantum walk with site-dependent coins.

A schedule is a sequence of coin layers; every layer applies a 2x2
unitary at each listed position (a default elsewhere) and is followed by
the conditional shift that moves coin-|0> amplitude right and coin-|1>
amplitude left. The final walker position is the measurement outcome.

Amplitudes are stored sparsely as ``{position: array}`` where each array
has shape (2,) for a single coin state or (2, B) for a batch of B coin
states propagated together.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import strategies as st
from .model import IDENTITY, TOL, Povm, as_ket, check_parameters, matrix2

NOT = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / math.sqrt(2.0)

OUTCOME_MAP_TOLERANCE = 1e-9
SUPPORT_TOLERANCE = 1e-12

# Probe states |0>, |1>, |+>, |->, |+i>, |-i>; together they fix a qubit operator.
_R = 1.0 / math.sqrt(2.0)
PROBES = np.array(
    [[1, 0, _R, _R, _R, _R], [0, 1, _R, -_R, 1j * _R, -1j * _R]],
    dtype=np.complex128,
)


class ScheduleValidationError(ValueError):
    """A coin in a schedule is not unitary."""


class UnsupportedScheduleError(ValueError):
    """The requested measurement cannot be compiled into a walk here."""


class CompilationMismatchError(RuntimeError):
    """Walk statistics cannot be matched to the POVM outcomes."""

    def __init__(self, message: str, residuals: dict | None = None):
        self.residuals = residuals or {}
        if self.residuals:
            rows = [f"  x={x:+d} -> outcome {k}: residual {r:.3e}" for (x, k), r in sorted(self.residuals.items())]
            message = message + "\n" + "\n".join(rows)
        super().__init__(message)


def unitarity_defect(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - IDENTITY)))


@dataclass(frozen=True, eq=False)
class CoinLayer:
    """Coins applied at listed positions; ``default`` everywhere else."""

    coins: dict[int, np.ndarray]
    default: np.ndarray = field(default_factory=IDENTITY.copy)

    def __post_init__(self):
        coins = {int(x): matrix2(u) for x, u in self.coins.items()}
        default = matrix2(self.default)
        for where, u in [*coins.items(), ("default", default)]:
            defect = unitarity_defect(u)
            if defect > TOL:
                raise ScheduleValidationError(
                    f"coin at position {where} is not unitary (|U^dag U - I| = {defect:.3e})"
                )
        object.__setattr__(self, "coins", coins)
        object.__setattr__(self, "default", default)

    def coin_at(self, x: int) -> np.ndarray:
        return self.coins.get(x, self.default)


@dataclass(frozen=True, eq=False)
class CoinSchedule:
    """Ordered coin layers, each followed by one conditional shift.

    ``roles`` optionally names physical elements, keyed by
    ``(layer index, position)``.
    """

    steps: tuple[CoinLayer, ...]
    roles: dict[tuple[int, int], str] = field(default_factory=dict)

    def __post_init__(self):
        steps = tuple(s if isinstance(s, CoinLayer) else CoinLayer(*s) for s in self.steps)
        object.__setattr__(self, "steps", steps)

    def __len__(self) -> int:
        return len(self.steps)

    def to_dict(self) -> dict:
        """JSON-ready dump; complex numbers become ``[re, im]`` pairs."""

        def enc(u):
            return [[[float(z.real), float(z.imag)] for z in row] for row in u]

        out = []
        for n, layer in enumerate(self.steps):
            coins = {}
            for x, u in sorted(layer.coins.items()):
                entry = {"matrix": enc(u)}
                role = self.roles.get((n, x))
                if role:
                    entry["role"] = role
                coins[str(x)] = entry
            out.append({"step": n + 1, "coins": coins, "default": enc(layer.default)})
        return {"steps": out}

    @classmethod
    def from_dict(cls, data: dict) -> "CoinSchedule":
        def dec(rows):
            return np.array([[complex(re, im) for re, im in row] for row in rows])

        steps = []
        roles = {}
        for n, step in enumerate(data["steps"]):
            coins = {}
            for x, entry in step["coins"].items():
                coins[int(x)] = dec(entry["matrix"])
                if "role" in entry:
                    roles[(n, int(x))] = entry["role"]
            steps.append(CoinLayer(coins, dec(step["default"])))
        return cls(tuple(steps), roles)


@dataclass(frozen=True, eq=False)
class WalkState:
    amplitudes: dict[int, np.ndarray]

    def norm(self):
        """Total probability (an array for batched states)."""
        return sum(np.sum(np.abs(a) ** 2, axis=0) for a in self.amplitudes.values())

    def probabilities(self) -> dict[int, float | np.ndarray]:
        return {x: np.sum(np.abs(a) ** 2, axis=0) for x, a in sorted(self.amplitudes.items())}

    def support(self, tol: float = 0.0) -> list[int]:
        return sorted(x for x, a in self.amplitudes.items() if np.max(np.abs(a) ** 2) > tol)


def initial_state(coin) -> WalkState:
    """Walker at x = 0 carrying ``coin`` (shape (2,) or (2, B))."""
    arr = np.array(coin, dtype=np.complex128)
    if arr.ndim == 1:
        arr = as_ket(arr)
    return WalkState({0: arr})


def apply_shift(state: WalkState) -> WalkState:
    out: dict[int, np.ndarray] = {}
    for x, a in state.amplitudes.items():
        for target, c in ((x + 1, 0), (x - 1, 1)):
            if not np.any(a[c]):
                continue
            slot = out.get(target)
            if slot is None:
                slot = out[target] = np.zeros_like(a)
            slot[c] += a[c]
    return WalkState(out)


def apply_coin_layer(state: WalkState, layer: CoinLayer) -> WalkState:
    return WalkState({x: layer.coin_at(x) @ a for x, a in state.amplitudes.items()})


def propagate(coin, schedule: CoinSchedule) -> WalkState:
    state = initial_state(coin)
    for layer in schedule.steps:
        state = apply_shift(apply_coin_layer(state, layer))
    return state


def run_walk(coin, schedule: CoinSchedule) -> tuple[dict[int, float], WalkState]:
    """Run the walk from x = 0; return the final position distribution and state."""
    final = propagate(coin, schedule)
    return {x: float(p) for x, p in final.probabilities().items()}, final


def _two_step_schedule(c12: np.ndarray) -> CoinSchedule:
    # layer 0: C_1^(1) at x=0; layer 1: C_1^(2) at x=1, NOT at x=-1;
    # layer 2: C_2^(1) at x=0; layer 3: C_2^(2) at x=1, NOT at x=-1.
    layers = (
        CoinLayer({0: IDENTITY}),
        CoinLayer({1: c12, -1: NOT}),
        CoinLayer({0: HADAMARD}),
        CoinLayer({1: IDENTITY, -1: NOT}),
    )
    roles = {
        (0, 0): "C1(1)",
        (1, 1): "H3",
        (1, -1): "H2",
        (2, 0): "H4",
        (3, 1): "C2(2)",
        (3, -1): "H5",
    }
    return CoinSchedule(layers, roles)


def reflection_coin(amount: float) -> np.ndarray:
    """Real symmetric coin [[sqrt(1-a^2), a], [a, -sqrt(1-a^2)]]."""
    c = math.sqrt(max(0.0, 1.0 - amount * amount))
    return np.array([[c, amount], [amount, -c]], dtype=np.complex128)


def schedule_med(p: float, theta: float, convention: st.MuConvention = st.MuConvention.DERIVED) -> CoinSchedule:
    check_parameters(p, theta)
    if p >= st.med_threshold(theta):
        return _two_step_schedule(NOT.copy())
    return _two_step_schedule(reflection_coin(st.med_mu(p, theta, convention)))


def schedule_mcd(p: float, theta: float) -> CoinSchedule:
    check_parameters(p, theta)
    nu = st.mcd_nu(p, theta)
    if nu > 1.0 + TOL:
        raise UnsupportedScheduleError(
            f"nu = {nu:.6g} > 1: the optimal measurement needs the four-element POVM "
            "with a nonzero inconclusive element, which is evaluated algebraically "
            "(strategies.mcd_povm) but not compiled into a walk"
        )
    return _two_step_schedule(reflection_coin(min(nu, 1.0)))


def compile_strategy(
    p: float,
    theta: float,
    strategy: st.Strategy,
    convention: st.MuConvention = st.MuConvention.DERIVED,
) -> tuple[CoinSchedule, Povm]:
    """Schedule plus the POVM that schedule actually realizes.

    For the printed MED convention the realized POVM is the three-element
    family at the printed mu, not the optimal one.
    """
    if st.Strategy(strategy) is st.Strategy.MED:
        schedule = schedule_med(p, theta, convention)
        solution = st.med_povm(p, theta)
        if solution.branch is st.MedBranch.THREE_ELEMENT and st.MuConvention(convention) is st.MuConvention.PRINTED:
            return schedule, st.med_povm_from_mu(st.med_mu(p, theta, convention))
        return schedule, solution.povm
    return schedule_mcd(p, theta), st.mcd_povm(p, theta).povm


@dataclass(frozen=True)
class OutcomeMap:
    """Final walker position -> POVM outcome index (0-based)."""

    positions: dict[int, int]
    max_residual: float
    residuals: dict[tuple[int, int], float] = field(default_factory=dict, compare=False)

    def position_of(self, outcome: int) -> int | None:
        for x, k in self.positions.items():
            if k == outcome:
                return x
        return None


def _operator_probabilities(element: np.ndarray, states: np.ndarray) -> np.ndarray:
    return np.einsum("ib,ij,jb->b", states.conj(), element, states).real


def derive_outcome_map(
    schedule: CoinSchedule, povm: Povm, tolerance: float = OUTCOME_MAP_TOLERANCE
) -> OutcomeMap:
    """Match final positions to POVM outcomes by simulating probe states.

    Each occupied position is compared with each element over the six
    probe states; the injective assignment with the smallest worst-case
    residual is chosen. Elements that vanish need no position.
    """
    final = propagate(PROBES, schedule)
    walk_probs = final.probabilities()
    positions = [x for x in sorted(walk_probs) if np.max(walk_probs[x]) > SUPPORT_TOLERANCE]
    element_probs = [_operator_probabilities(e, PROBES) for e in povm.elements]
    residuals = {
        (x, k): float(np.max(np.abs(walk_probs[x] - element_probs[k])))
        for x in positions
        for k in range(len(povm))
    }
    required = {k for k, e in enumerate(povm.elements) if np.max(np.abs(e)) > SUPPORT_TOLERANCE}
    best = None
    if len(positions) <= len(povm):
        for assignment in itertools.permutations(range(len(povm)), len(positions)):
            if not required.issubset(assignment):
                continue
            worst = max((residuals[(x, k)] for x, k in zip(positions, assignment)), default=0.0)
            if best is None or worst < best[0]:
                best = (worst, assignment)
    if best is None:
        raise CompilationMismatchError(
            f"{len(positions)} occupied final positions cannot cover "
            f"{len(required)} nonzero POVM elements",
            residuals,
        )
    worst, assignment = best
    if worst > tolerance:
        raise CompilationMismatchError(
            f"best position/outcome assignment has residual {worst:.3e} > {tolerance:.1e}",
            residuals,
        )
    return OutcomeMap(dict(zip(positions, assignment)), worst, residuals)


def haar_states(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` Haar-random qubit states as columns of a (2, n) array."""
    z = rng.standard_normal((2, n)) + 1j * rng.standard_normal((2, n))
    return z / np.linalg.norm(z, axis=0)


def walk_outcome_probabilities(
    schedule: CoinSchedule, outcome_map: OutcomeMap, n_outcomes: int, states: np.ndarray
) -> np.ndarray:
    """Probabilities (n_outcomes, B) of each outcome for a batch of coin states."""
    states = np.asarray(states, dtype=np.complex128)
    single = states.ndim == 1
    if single:
        states = states[:, None]
    probs = propagate(states, schedule).probabilities()
    out = np.zeros((n_outcomes, states.shape[1]))
    for x, k in outcome_map.positions.items():
        if x in probs:
            out[k] = probs[x]
    return out[:, 0] if single else out


def verify_schedule(
    schedule: CoinSchedule,
    povm: Povm,
    sample_count: int = 100,
    seed: int = 0,
    outcome_map: OutcomeMap | None = None,
) -> float:
    """Largest |P_walk(k) - <psi|E_k|psi>| over Haar-random coin states.

    Without an explicit ``outcome_map`` the best-fit assignment is used,
    so a schedule realizing a different POVM yields a large deviation
    instead of an error.
    """
    if outcome_map is None:
        outcome_map = derive_outcome_map(schedule, povm, tolerance=math.inf)
    states = haar_states(sample_count, np.random.default_rng(seed))
    walk = walk_outcome_probabilities(schedule, outcome_map, len(povm), states)
    expected = np.array([_operator_probabilities(e, states) for e in povm.elements])
    return float(np.max(np.abs(walk - expected)))


__all__ = [
    "HADAMARD",
    "NOT",
    "CoinLayer",
    "CoinSchedule",
    "CompilationMismatchError",
    "OutcomeMap",
    "ScheduleValidationError",
    "UnsupportedScheduleError",
    "WalkState",
    "apply_coin_layer",
    "apply_shift",
    "compile_strategy",
    "derive_outcome_map",
    "haar_states",
    "initial_state",
    "propagate",
    "reflection_coin",
    "run_walk",
    "schedule_mcd",
    "schedule_med",
    "verify_schedule",
    "walk_outcome_probabilities",
]
