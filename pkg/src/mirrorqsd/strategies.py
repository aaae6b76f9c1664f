"""Optimal minimum-error (MED) and maximum-confidence (MCD) measurements.

Quantum figures of merit are always evaluated from the constructed POVM;
the closed forms and the eigenvalue oracle exist to cross-check them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .model import (
    TOL,
    DomainError,
    Ensemble,
    Povm,
    eigvalsh2,
    ensemble_average,
    check_parameters,
    mirror_ensemble,
)

ADVANTAGE_THRESHOLD = 1e-9

INCONCLUSIVE = "inconclusive"


class Strategy(str, enum.Enum):
    MED = "med"
    MCD = "mcd"


class MuConvention(str, enum.Enum):
    """Denominator used for the MED mixing parameter.

    ``DERIVED`` is 1 - p(2 + cos^2 t), the stationary point of the success
    probability. ``PRINTED`` is 1 - p(2 + p cos^2 t), the variant that
    reproduces the published waveplate setting for the walk.
    """

    DERIVED = "derived"
    PRINTED = "printed"


class MedBranch(str, enum.Enum):
    THREE_ELEMENT = "three-element"
    PROJECTIVE = "projective"


class SingularEnsembleError(ValueError):
    """The ensemble average is not invertible."""


def _check_theta(theta: float) -> None:
    if not (math.isfinite(theta) and 0.0 < theta < math.pi / 2):
        raise DomainError(f"theta = {theta!r} violates 0 < theta < pi/2")


# --------------------------------------------------------------------------
# minimum-error discrimination
# --------------------------------------------------------------------------


def med_threshold(theta: float) -> float:
    """Largest p for which the three-outcome MED measurement is optimal."""
    _check_theta(theta)
    c, s = math.cos(theta), math.sin(theta)
    return 1.0 / (2.0 + c * (c + s))


def med_mu(p: float, theta: float, convention: MuConvention = MuConvention.DERIVED) -> float:
    """Raw mixing parameter, without clamping to the physical range."""
    c, s = math.cos(theta), math.sin(theta)
    if MuConvention(convention) is MuConvention.PRINTED:
        denom = 1.0 - p * (2.0 + p * c * c)
    else:
        denom = 1.0 - p * (2.0 + c * c)
    return p * c * s / denom


def med_povm_from_mu(mu: float) -> Povm:
    """Three-element family: two symmetric rank-1 guesses and |0><0| remainder."""
    half = 0.5
    e1 = np.array([[half * mu * mu, half * mu], [half * mu, half]], dtype=np.complex128)
    e2 = np.array([[half * mu * mu, -half * mu], [-half * mu, half]], dtype=np.complex128)
    e3 = np.array([[1.0 - mu * mu, 0.0], [0.0, 0.0]], dtype=np.complex128)
    return Povm((e1, e2, e3), labels=(1, 2, 3))


@dataclass(frozen=True, eq=False)
class MedSolution:
    branch: MedBranch
    mu: float
    povm: Povm
    threshold_p: float


def med_povm(p: float, theta: float) -> MedSolution:
    """Optimal MED measurement for the mirror-symmetric ensemble.

    Below the threshold the three-element measurement is used; at or
    above it the third element vanishes and the first two become the
    projectors onto |+> and |->.
    """
    check_parameters(p, theta)
    threshold = med_threshold(theta)
    if p < threshold:
        mu = med_mu(p, theta)
        return MedSolution(MedBranch.THREE_ELEMENT, mu, med_povm_from_mu(mu), threshold)
    return MedSolution(MedBranch.PROJECTIVE, 1.0, med_povm_from_mu(1.0), threshold)


def success_probability(ensemble: Ensemble, povm: Povm) -> float:
    """Sum of p_i <psi_i|E_i|psi_i> where E_i is the element labelled i."""
    total = 0.0
    for i, (prior, psi) in enumerate(zip(ensemble.priors, ensemble.states), start=1):
        e = povm.element(i)
        total += float(prior) * float(np.vdot(psi, e @ psi).real)
    return total


def med_success_quantum(p: float, theta: float) -> float:
    solution = med_povm(p, theta)
    return success_probability(mirror_ensemble(p, theta), solution.povm)


def med_success_noncontextual(p: float, theta: float) -> float:
    check_parameters(p, theta)
    c2 = math.cos(theta) ** 2
    cc2 = math.cos(2.0 * theta) ** 2
    if p >= 1.0 / 3.0:
        return 1.0 - (1.0 - 2.0 * p) * c2 - p * cc2
    return 1.0 - p * c2 - p * cc2


def med_objective(mu, p: float, theta: float):
    """Success probability of the three-element family as a function of mu.

    Vectorizes over ``mu``.
    """
    c, s = math.cos(theta), math.sin(theta)
    mu = np.asarray(mu, dtype=float)
    return p * (mu * c + s) ** 2 + (1.0 - 2.0 * p) * (1.0 - mu * mu)


def brute_force_optimize_med(p: float, theta: float, grid_size: int = 10**6) -> tuple[float, float]:
    """Grid search over mu in [0, 1] followed by bounded scalar refinement.

    Independent of the closed-form mu; used to adjudicate which
    denominator is optimal.
    """
    check_parameters(p, theta)
    if grid_size < 1000:
        raise ValueError("grid_size must be at least 1000")
    if p >= med_threshold(theta):
        raise DomainError("brute-force MED search requires p below the three-element threshold")
    grid = np.linspace(0.0, 1.0, grid_size)
    values = med_objective(grid, p, theta)
    k = int(np.argmax(values))
    step = 1.0 / (grid_size - 1)
    lo, hi = max(0.0, grid[k] - step), min(1.0, grid[k] + step)
    res = minimize_scalar(
        lambda m: -float(med_objective(m, p, theta)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-13},
    )
    mu_star, s_star = float(res.x), float(-res.fun)
    if values[k] > s_star:
        mu_star, s_star = float(grid[k]), float(values[k])
    return mu_star, s_star


# --------------------------------------------------------------------------
# maximum-confidence discrimination
# --------------------------------------------------------------------------


def mcd_nu(p: float, theta: float) -> float:
    s = math.sin(theta)
    return p * math.sin(2.0 * theta) / (1.0 - 2.0 * p * s * s)


@dataclass(frozen=True, eq=False)
class McdSolution:
    nu: float
    xi: float
    povm: Povm
    inconclusive_indices: tuple = (INCONCLUSIVE,)


def mcd_povm(p: float, theta: float, xi: float | None = None) -> McdSolution:
    """Four-element maximum-confidence measurement.

    The guess elements for states 1 and 2 are proportional to
    rho^-1 |psi_i><psi_i| rho^-1; the guess for state 3 is along |0>.
    ``xi`` defaults to min(1, 1/nu^2), the largest admissible scale,
    which leaves the inconclusive element zero whenever nu <= 1.
    """
    check_parameters(p, theta)
    nu = mcd_nu(p, theta)
    xi_max = 1.0 if nu <= 1.0 else 1.0 / (nu * nu)
    if xi is None:
        xi = xi_max
    elif not 0.0 < xi <= xi_max * (1.0 + TOL):
        raise DomainError(f"xi = {xi!r} violates 0 < xi <= {xi_max!r}")
    h = 0.5 * xi
    e1 = np.array([[h * nu * nu, h * nu], [h * nu, h]], dtype=np.complex128)
    e2 = np.array([[h * nu * nu, -h * nu], [-h * nu, h]], dtype=np.complex128)
    e3 = np.array([[max(0.0, 1.0 - nu * nu * xi), 0.0], [0.0, 0.0]], dtype=np.complex128)
    e4 = np.array([[0.0, 0.0], [0.0, 1.0 - xi]], dtype=np.complex128)
    povm = Povm((e1, e2, e3, e4), labels=(1, 2, 3, INCONCLUSIVE))
    return McdSolution(nu=nu, xi=xi, povm=povm)


def confidence(ensemble: Ensemble, povm: Povm, state: int = 1) -> float:
    """Posterior probability of ``state`` given the outcome labelled ``state``."""
    e = povm.element(state)
    psi = ensemble.states[state - 1]
    joint = ensemble.priors[state - 1] * float(np.vdot(psi, e @ psi).real)
    marginal = float(np.sum(ensemble_average(ensemble) * e.T).real)
    return joint / marginal


def mcd_confidence_quantum(p: float, theta: float, xi: float | None = None) -> float:
    solution = mcd_povm(p, theta, xi)
    return confidence(mirror_ensemble(p, theta), solution.povm, 1)


def mcd_confidence_closed_form(p: float, theta: float) -> float:
    """(1 + 2p cos 2t) / (2 - 4p sin^2 t)."""
    check_parameters(p, theta)
    return (1.0 + 2.0 * p * math.cos(2.0 * theta)) / (2.0 - 4.0 * p * math.sin(theta) ** 2)


def max_confidence_eigen_oracle(ensemble: Ensemble, state: int) -> float:
    """p_i <psi_i| rho^-1 |psi_i>, the largest achievable confidence for a pure state.

    ``state`` is 1-based.
    """
    rho = ensemble_average(ensemble)
    lo, _ = eigvalsh2(rho)
    if lo <= 1e-14:
        raise SingularEnsembleError(f"ensemble average is singular (min eigenvalue {lo:.3e})")
    det = rho[0, 0] * rho[1, 1] - rho[0, 1] * rho[1, 0]
    inverse = np.array([[rho[1, 1], -rho[0, 1]], [-rho[1, 0], rho[0, 0]]]) / det
    psi = ensemble.states[state - 1]
    return float(ensemble.priors[state - 1] * np.vdot(psi, inverse @ psi).real)


def mcd_confidence_noncontextual(p: float, theta: float) -> float:
    check_parameters(p, theta)
    c2 = math.cos(theta) ** 2
    return 1.0 / (1.0 + math.cos(2.0 * theta) ** 2 + (1.0 / p - 2.0) * c2)


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundsReport:
    p: float
    theta: float
    strategy: Strategy
    quantum_value: float
    noncontextual_value: float
    gap: float
    advantage: bool


def quantum_value(p: float, theta: float, strategy: Strategy) -> float:
    if Strategy(strategy) is Strategy.MED:
        return med_success_quantum(p, theta)
    return mcd_confidence_quantum(p, theta)


def noncontextual_value(p: float, theta: float, strategy: Strategy) -> float:
    if Strategy(strategy) is Strategy.MED:
        return med_success_noncontextual(p, theta)
    return mcd_confidence_noncontextual(p, theta)


def bounds_report(p: float, theta: float, strategy: Strategy) -> BoundsReport:
    strategy = Strategy(strategy)
    q = float(quantum_value(p, theta, strategy))
    nc = float(noncontextual_value(p, theta, strategy))
    gap = q - nc
    return BoundsReport(
        p=float(p),
        theta=float(theta),
        strategy=strategy,
        quantum_value=q,
        noncontextual_value=nc,
        gap=gap,
        advantage=bool(gap > ADVANTAGE_THRESHOLD),
    )


def optimal_povm(p: float, theta: float, strategy: Strategy) -> Povm:
    if Strategy(strategy) is Strategy.MED:
        return med_povm(p, theta).povm
    return mcd_povm(p, theta).povm


__all__ = [
    "ADVANTAGE_THRESHOLD",
    "INCONCLUSIVE",
    "BoundsReport",
    "McdSolution",
    "MedBranch",
    "MedSolution",
    "MuConvention",
    "SingularEnsembleError",
    "Strategy",
    "bounds_report",
    "brute_force_optimize_med",
    "confidence",
    "max_confidence_eigen_oracle",
    "mcd_confidence_closed_form",
    "mcd_confidence_noncontextual",
    "mcd_confidence_quantum",
    "mcd_nu",
    "mcd_povm",
    "med_mu",
    "med_objective",
    "med_povm",
    "med_povm_from_mu",
    "med_success_noncontextual",
    "med_success_quantum",
    "med_threshold",
    "noncontextual_value",
    "optimal_povm",
    "quantum_value",
    "success_probability",
]
