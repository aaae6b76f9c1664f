"""Qubit states, ensembles and POVMs for mirror-symmetric state discrimination.

Matrices are plain ``numpy`` arrays of shape (2, 2) and dtype complex128;
pure states are arrays of shape (2,). The helpers here validate those
arrays against the physical invariants (normalization, Hermiticity,
positivity, completeness) using a fixed tolerance of 1e-12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TOL = 1e-12

IDENTITY = np.eye(2, dtype=np.complex128)
KET0 = np.array([1.0, 0.0], dtype=np.complex128)
KET1 = np.array([0.0, 1.0], dtype=np.complex128)

# Largest prior weight p accepted for the two mirror states. p = 1/2 is the
# closed edge of the plotted parameter space (third state gets prior zero).
P_MAX = 0.5


class DomainError(ValueError):
    """A parameter lies outside its admissible range."""


class PovmValidationError(ValueError):
    """A set of operators fails the POVM conditions."""

    def __init__(self, diagnostics: "PovmDiagnostics"):
        self.diagnostics = diagnostics
        super().__init__(f"invalid POVM:\n{diagnostics.describe()}")


def matrix2(entries) -> np.ndarray:
    """Coerce ``entries`` to a finite 2x2 complex matrix."""
    m = np.array(entries, dtype=np.complex128)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def ket(a0: complex, a1: complex) -> np.ndarray:
    """Normalized qubit state ``a0|0> + a1|1>``.

    Raises ``ValueError`` when the squared norm differs from 1 by more
    than 1e-12.
    """
    v = np.array([a0, a1], dtype=np.complex128)
    norm2 = float(np.vdot(v, v).real)
    if not np.all(np.isfinite(v)) or abs(norm2 - 1.0) > TOL:
        raise ValueError(f"state is not normalized (|a0|^2+|a1|^2 = {norm2!r})")
    return v


def as_ket(state) -> np.ndarray:
    v = np.asarray(state, dtype=np.complex128)
    if v.shape != (2,):
        raise ValueError(f"expected a qubit state vector, got shape {v.shape}")
    return ket(v[0], v[1])


def projector(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


def hermiticity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def eigvalsh2(m: np.ndarray) -> tuple[float, float]:
    """Eigenvalues (low, high) of a 2x2 Hermitian matrix in closed form.

    Only the Hermitian part of ``m`` is used.
    """
    a = m[0, 0].real
    d = m[1, 1].real
    b = 0.5 * (m[0, 1] + m[1, 0].conjugate())
    half_tr = 0.5 * (a + d)
    radius = math.hypot(0.5 * (a - d), abs(b))
    return half_tr - radius, half_tr + radius


def density(m) -> np.ndarray:
    """Validate and return a qubit density matrix."""
    rho = matrix2(m)
    herm = hermiticity_defect(rho)
    tr = complex(np.trace(rho))
    lo, _ = eigvalsh2(rho)
    if herm > TOL or abs(tr - 1.0) > TOL or lo < -TOL:
        raise ValueError(
            f"not a density matrix: hermiticity defect {herm:.3e}, "
            f"trace {tr:.15g}, min eigenvalue {lo:.3e}"
        )
    return rho


def check_parameters(p: float, theta: float) -> None:
    """Raise ``DomainError`` unless 0 < p <= 1/2 and 0 < theta < pi/2."""
    if not (math.isfinite(p) and 0.0 < p <= P_MAX):
        raise DomainError(f"p = {p!r} violates 0 < p <= {P_MAX}")
    if not (math.isfinite(theta) and 0.0 < theta < math.pi / 2):
        raise DomainError(f"theta = {theta!r} violates 0 < theta < pi/2")


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Three pure states with priors (p, p, 1 - 2p)."""

    states: tuple[np.ndarray, np.ndarray, np.ndarray]
    priors: np.ndarray
    p: float
    theta: float

    def __len__(self) -> int:
        return len(self.states)

    def densities(self) -> list[np.ndarray]:
        return [projector(s) for s in self.states]


def mirror_ensemble(p: float, theta: float) -> Ensemble:
    """States cos(t)|0> +/- sin(t)|1> and |0>, with priors (p, p, 1-2p)."""
    check_parameters(p, theta)
    c, s = math.cos(theta), math.sin(theta)
    states = (ket(c, s), ket(c, -s), KET0.copy())
    priors = np.array([p, p, 1.0 - 2.0 * p])
    return Ensemble(states=states, priors=priors, p=float(p), theta=float(theta))


def ensemble_average(ensemble: Ensemble) -> np.ndarray:
    """Prior-weighted average density matrix of the ensemble."""
    rho = np.zeros((2, 2), dtype=np.complex128)
    for prior, psi in zip(ensemble.priors, ensemble.states):
        rho += prior * projector(psi)
    return rho


@dataclass(frozen=True, eq=False)
class Povm:
    """Ordered measurement operators with an outcome label for each."""

    elements: tuple[np.ndarray, ...]
    labels: tuple = ()

    def __post_init__(self):
        elements = tuple(matrix2(e) for e in self.elements)
        labels = tuple(self.labels) if self.labels else tuple(range(1, len(elements) + 1))
        if len(labels) != len(elements):
            raise ValueError("one label per POVM element is required")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.elements)

    def index(self, label) -> int:
        return self.labels.index(label)

    def element(self, label) -> np.ndarray:
        return self.elements[self.index(label)]


@dataclass(frozen=True)
class PovmDiagnostics:
    min_eigenvalues: tuple[float, ...]
    hermiticity_defects: tuple[float, ...]
    completeness_defect: float
    tolerance: float = TOL
    labels: tuple = field(default=())

    @property
    def passed(self) -> bool:
        return (
            all(lam >= -self.tolerance for lam in self.min_eigenvalues)
            and all(h <= self.tolerance for h in self.hermiticity_defects)
            and self.completeness_defect <= self.tolerance
        )

    def __bool__(self) -> bool:
        return self.passed

    def describe(self) -> str:
        lines = []
        labels = self.labels or tuple(range(1, len(self.min_eigenvalues) + 1))
        for label, lam, herm in zip(labels, self.min_eigenvalues, self.hermiticity_defects):
            flags = []
            if lam < -self.tolerance:
                flags.append("negative eigenvalue")
            if herm > self.tolerance:
                flags.append("not Hermitian")
            status = ", ".join(flags) or "ok"
            lines.append(
                f"  element {label}: min eigenvalue {lam:.3e}, "
                f"hermiticity defect {herm:.3e} [{status}]"
            )
        flag = "ok" if self.completeness_defect <= self.tolerance else "sum != identity"
        lines.append(f"  completeness defect {self.completeness_defect:.3e} [{flag}]")
        return "\n".join(lines)


def validate_povm(povm: Povm, tol: float = TOL) -> PovmDiagnostics:
    """Per-element positivity/Hermiticity and overall completeness report."""
    mins = []
    herms = []
    total = np.zeros((2, 2), dtype=np.complex128)
    for e in povm.elements:
        mins.append(eigvalsh2(e)[0])
        herms.append(hermiticity_defect(e))
        total += e
    completeness = float(np.max(np.abs(total - IDENTITY)))
    return PovmDiagnostics(
        min_eigenvalues=tuple(mins),
        hermiticity_defects=tuple(herms),
        completeness_defect=completeness,
        tolerance=tol,
        labels=povm.labels,
    )


def _as_density(state) -> np.ndarray:
    arr = np.asarray(state, dtype=np.complex128)
    if arr.shape == (2,):
        return projector(as_ket(arr))
    return density(arr)


def born_probabilities(state, povm: Povm) -> np.ndarray:
    """Unclamped Tr(rho E_k) for every element; no validation."""
    rho = _as_density(state)
    return np.array([np.sum(rho * e.T).real for e in povm.elements])


def outcome_probabilities(state, povm: Povm) -> np.ndarray:
    """Outcome distribution of ``povm`` on ``state`` (a ket or a density matrix).

    Each probability is clamped to [0, 1]; use :func:`born_probabilities`
    for the raw values.
    """
    diagnostics = validate_povm(povm)
    if not diagnostics.passed:
        raise PovmValidationError(diagnostics)
    return np.clip(born_probabilities(state, povm), 0.0, 1.0)
