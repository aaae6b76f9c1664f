"""Parameter scans over (p, theta), equality-locus solving and figure data."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from .model import P_MAX, DomainError, mirror_ensemble
from .optics import estimate_figure_of_merit, simulate_counts
from .strategies import MuConvention, Strategy, bounds_report, mcd_nu, optimal_povm
from .walk import compile_strategy, derive_outcome_map

CSV_COLUMNS = (
    "p",
    "theta",
    "quantum",
    "noncontextual",
    "gap",
    "advantage",
    "mc_mean",
    "mc_std",
    "n_photons",
    "runs",
    "seed",
)

LOCUS_TOLERANCE = 1e-10

MED_SLICES = (math.pi / 12, math.pi / 4, 5 * math.pi / 12)
MCD_SLICES = (math.pi / 6, math.pi / 4, math.pi / 3)
EXPERIMENT_PS = (0.1, 0.2, 0.3, 0.4, 0.5)


class ConfigError(ValueError):
    """Invalid scan configuration; the message names the offending field."""


@dataclass(frozen=True)
class ScanConfig:
    strategy: Strategy = Strategy.MED
    p_grid: tuple[float, float, int] = (0.01, 0.5, 50)
    theta_grid: tuple[float, float, int] = (0.01, math.pi / 2 - 0.01, 50)
    mu_convention: MuConvention = MuConvention.DERIVED
    n_photons: int = 0
    runs: int = 30
    seed: int = 0
    output_path: str | None = None
    format: str = "csv"

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "mu_convention", MuConvention(self.mu_convention))
        object.__setattr__(self, "p_grid", (float(self.p_grid[0]), float(self.p_grid[1]), int(self.p_grid[2])))
        object.__setattr__(
            self, "theta_grid", (float(self.theta_grid[0]), float(self.theta_grid[1]), int(self.theta_grid[2]))
        )
        self.validate()

    def validate(self) -> None:
        problems = []
        for name, (lo, hi, count), inside in (
            ("p_grid", self.p_grid, lambda v: 0.0 < v <= P_MAX),
            ("theta_grid", self.theta_grid, lambda v: 0.0 < v < math.pi / 2),
        ):
            if not (inside(lo) and inside(hi)):
                problems.append(f"{name}: bounds ({lo}, {hi}) leave the admissible range")
            if lo > hi:
                problems.append(f"{name}: min {lo} exceeds max {hi}")
            if lo == hi:
                if count < 1:
                    problems.append(f"{name}: count must be positive")
            elif count < 2:
                problems.append(f"{name}: count {count} < 2 for a non-degenerate range")
        if self.n_photons < 0:
            problems.append("n_photons: must be >= 0")
        if self.runs < 1:
            problems.append("runs: must be >= 1")
        if self.format not in ("csv", "json"):
            problems.append(f"format: {self.format!r} is not 'csv' or 'json'")
        if problems:
            raise ConfigError("; ".join(problems))

    def p_values(self) -> np.ndarray:
        return _grid(*self.p_grid)

    def theta_values(self) -> np.ndarray:
        return _grid(*self.theta_grid)


def _grid(lo: float, hi: float, count: int) -> np.ndarray:
    if lo == hi:
        return np.array([lo])
    return np.linspace(lo, hi, count)


@dataclass(frozen=True)
class RegionRow:
    p: float
    theta: float
    quantum_value: float
    noncontextual_value: float
    gap: float
    advantage: bool
    mc_mean: float | None = None
    mc_std: float | None = None
    n_photons: int | None = None
    runs: int | None = None
    seed: int | None = None


def emulate_point(
    p: float,
    theta: float,
    strategy: Strategy,
    n_photons: int,
    runs: int,
    seed: int,
    convention: MuConvention = MuConvention.DERIVED,
    grid_index: int = 0,
):
    """Photon-counting emulation of one setting; returns (estimate, records).

    Outcome probabilities come from the compiled walk whenever one exists
    (MED always, MCD for nu <= 1); otherwise from the POVM directly.
    """
    strategy = Strategy(strategy)
    ensemble = mirror_ensemble(p, theta)
    if strategy is Strategy.MCD and mcd_nu(p, theta) > 1.0:
        povm = optimal_povm(p, theta, strategy)
        records = simulate_counts(ensemble, povm, None, n_photons, runs, seed, grid_index=grid_index)
    else:
        schedule, povm = compile_strategy(p, theta, strategy, convention)
        outcome_map = derive_outcome_map(schedule, povm)
        records = simulate_counts(
            ensemble, povm, outcome_map, n_photons, runs, seed, schedule=schedule, grid_index=grid_index
        )
    return estimate_figure_of_merit(records, strategy), records


def region_row(
    p: float,
    theta: float,
    strategy: Strategy,
    n_photons: int = 0,
    runs: int = 30,
    seed: int = 0,
    convention: MuConvention = MuConvention.DERIVED,
    grid_index: int = 0,
) -> RegionRow:
    report = bounds_report(p, theta, strategy)
    row = RegionRow(
        p=report.p,
        theta=report.theta,
        quantum_value=report.quantum_value,
        noncontextual_value=report.noncontextual_value,
        gap=report.gap,
        advantage=report.advantage,
    )
    if n_photons > 0:
        estimate, _ = emulate_point(p, theta, strategy, n_photons, runs, seed, convention, grid_index)
        row = RegionRow(**{**asdict(row), "mc_mean": estimate.mean, "mc_std": estimate.std,
                           "n_photons": n_photons, "runs": runs, "seed": seed})
    return row


def scan(config: ScanConfig) -> list[RegionRow]:
    """One row per grid point, theta-major then p, in deterministic order."""
    rows = []
    index = 0
    for theta in config.theta_values():
        for p in config.p_values():
            rows.append(
                region_row(
                    float(p), float(theta), config.strategy, config.n_photons,
                    config.runs, config.seed, config.mu_convention, index,
                )
            )
            index += 1
    return rows


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(float(value)) if isinstance(value, float) else str(value)


def _row_values(row: RegionRow) -> tuple:
    return (
        row.p, row.theta, row.quantum_value, row.noncontextual_value, row.gap, row.advantage,
        row.mc_mean, row.mc_std, row.n_photons, row.runs, row.seed,
    )


def rows_to_csv(rows: list[RegionRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_cell(v) for v in _row_values(row)])
    return buf.getvalue()


def rows_to_json(rows: list[RegionRow]) -> str:
    payload = [dict(zip(CSV_COLUMNS, _row_values(r))) for r in rows]
    return json.dumps(payload, indent=1) + "\n"


def write_rows(rows: list[RegionRow], path, fmt: str = "csv") -> Path:
    path = Path(path)
    text = rows_to_csv(rows) if fmt == "csv" else rows_to_json(rows)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


# --------------------------------------------------------------------------
# equality locus
# --------------------------------------------------------------------------


def gap(p: float, theta: float, strategy: Strategy) -> float:
    return bounds_report(p, theta, strategy).gap


def equality_locus(
    strategy: Strategy, theta: float, p_bracket: tuple[float, float] = (1e-6, P_MAX)
) -> float | None:
    """Value of p in the bracket where the quantum value meets the bound.

    A sign change of the gap is refined by bisection. Without one, a
    non-negative gap may still touch zero (the MCD case); that minimum is
    located by bounded minimization and accepted if |gap| < 1e-10.
    Returns ``None`` when neither is found.
    """
    lo, hi = p_bracket
    if not (0.0 < lo < hi <= P_MAX):
        raise DomainError(f"p bracket {p_bracket!r} must satisfy 0 < lo < hi <= {P_MAX}")
    if not 0.0 < theta < math.pi / 2:
        raise DomainError(f"theta = {theta!r} violates 0 < theta < pi/2")

    def f(p):
        return gap(p, theta, strategy)

    g_lo, g_hi = f(lo), f(hi)
    if g_lo * g_hi < 0.0:
        root = bisect(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        return float(root) if abs(f(root)) < LOCUS_TOLERANCE else None
    if g_lo >= 0.0 and g_hi >= 0.0:
        candidates = [lo, hi]
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        candidates.append(float(res.x))
        best = min(candidates, key=lambda p: abs(f(p)))
        if abs(f(best)) < LOCUS_TOLERANCE:
            return float(best)
    return None


def printed_mcd_locus(theta: float) -> float:
    """The closed-form MCD equality curve as published; may fall outside (0, 1/2]."""
    denom = 2.0 * (3.0 + 4.0 * math.cos(4.0 * theta))
    numer = 1.0 / math.sin(theta) ** 2 - 2.0 * math.cos(2.0 * theta)
    return numer / denom if denom != 0.0 else math.copysign(math.inf, numer)


def locus_report(strategy: Strategy, theta: float, p_bracket: tuple[float, float] = (1e-6, P_MAX)) -> dict:
    strategy = Strategy(strategy)
    root = equality_locus(strategy, theta, p_bracket)
    report = {
        "strategy": strategy.value,
        "theta": theta,
        "p_bracket": list(p_bracket),
        "root": root,
        "gap_at_root": None if root is None else gap(root, theta, strategy),
    }
    if strategy is Strategy.MCD:
        printed = printed_mcd_locus(theta)
        report["printed_curve"] = printed
        report["printed_in_range"] = bool(0.0 < printed <= P_MAX)
        report["discrepancy"] = None if root is None else printed - root
    return report


# --------------------------------------------------------------------------
# figure data
# --------------------------------------------------------------------------

FIGURES = ("fig3a", "fig3b", "fig4a", "fig4b")


def _figure_strategy(figure: str) -> Strategy:
    return Strategy.MED if figure.startswith("fig3") else Strategy.MCD


def _write_csv(path: Path, header, rows) -> Path:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    path.write_text(buf.getvalue())
    return path


def figure_data(figure: str, config: ScanConfig, out_dir) -> list[Path]:
    """Write the data behind one figure panel and return the file paths.

    Slice panels (``fig3a``, ``fig4a``) get analytic curves over the
    config's p grid at three fixed angles, plus emulated points at
    p = 0.1..0.5 when ``config.n_photons > 0``. Surface panels
    (``fig3b``, ``fig4b``) get a full scan over the config grid.
    """
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; choose from {FIGURES}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    strategy = _figure_strategy(figure)

    if figure.endswith("b"):
        surface = ScanConfig(**{**asdict(config), "strategy": strategy, "n_photons": 0})
        return [write_rows(scan(surface), out_dir / f"{figure}_surface.csv")]

    slices = MED_SLICES if strategy is Strategy.MED else MCD_SLICES
    curves = []
    for theta in slices:
        for p in config.p_values():
            r = bounds_report(float(p), theta, strategy)
            curves.append((theta, r.p, r.quantum_value, r.noncontextual_value, r.gap, r.advantage))
    paths = [
        _write_csv(
            out_dir / f"{figure}_curves.csv",
            ("theta", "p", "quantum", "noncontextual", "gap", "advantage"),
            curves,
        )
    ]
    if config.n_photons > 0:
        points = []
        index = 0
        for theta in slices:
            for p in EXPERIMENT_PS:
                row = region_row(p, theta, strategy, config.n_photons, config.runs, config.seed,
                                 config.mu_convention, index)
                points.append((theta, p, row.quantum_value, row.mc_mean, row.mc_std,
                               config.n_photons, config.runs, config.seed))
                index += 1
        paths.append(
            _write_csv(
                out_dir / f"{figure}_points.csv",
                ("theta", "p", "quantum", "mc_mean", "mc_std", "n_photons", "runs", "seed"),
                points,
            )
        )
    return paths
