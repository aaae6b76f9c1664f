"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line (visible in
``pytest -v`` output) before asserting. Run standalone with
``python3 tests/test_acceptance.py`` to get just the summary.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from mirrorqsd.model import mirror_ensemble, validate_povm
from mirrorqsd.optics import angles_for_schedule, estimate_figure_of_merit, preparation_settings, simulate_counts
from mirrorqsd.scan import equality_locus, gap
from mirrorqsd.strategies import (
    MuConvention,
    Strategy,
    bounds_report,
    brute_force_optimize_med,
    mcd_confidence_closed_form,
    mcd_confidence_noncontextual,
    mcd_confidence_quantum,
    mcd_nu,
    mcd_povm,
    med_mu,
    med_objective,
    med_povm,
    med_success_quantum,
    med_threshold,
    max_confidence_eigen_oracle,
)
from mirrorqsd.walk import compile_strategy, derive_outcome_map, schedule_med, verify_schedule

PI = math.pi


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {'PASS' if ok else 'FAIL'}: {detail}")
        return ok

    return emit


def check_povm_validity():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst_eig, worst_comp = math.inf, 0.0
    for _ in range(10_000):
        p = rng.uniform(0.0, 0.5)
        theta = rng.uniform(0.0, PI / 2)
        if p == 0.0 or theta == 0.0:
            continue
        for povm in (med_povm(p, theta).povm, mcd_povm(p, theta).povm):
            d = validate_povm(povm)
            worst_eig = min(worst_eig, min(d.min_eigenvalues))
            worst_comp = max(worst_comp, d.completeness_defect)
    elapsed = time.perf_counter() - start
    ok = worst_eig >= -1e-12 and worst_comp <= 1e-12 and elapsed < 5.0
    return ok, f"min eig {worst_eig:.2e}, completeness {worst_comp:.2e}, {elapsed:.2f} s"


def check_walk_equivalence():
    start = time.perf_counter()
    worst = {Strategy.MED: 0.0, Strategy.MCD: 0.0}
    branches = set()
    skipped = 0
    points = 0
    for i, theta in enumerate(np.linspace(0.01, PI / 2 - 0.01, 50)):
        for j, p in enumerate(np.linspace(0.01, 0.5, 50)):
            for strategy in Strategy:
                if strategy is Strategy.MCD and mcd_nu(p, theta) > 1.0:
                    skipped += 1
                    continue
                if strategy is Strategy.MED:
                    branches.add(med_povm(p, theta).branch)
                schedule, povm = compile_strategy(p, theta, strategy)
                dev = verify_schedule(schedule, povm, 100, seed=50 * i + j)
                worst[strategy] = max(worst[strategy], dev)
                points += 1
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) <= 1e-10 and len(branches) == 2 and elapsed < 30.0
    return ok, (
        f"max dev MED {worst[Strategy.MED]:.2e} MCD {worst[Strategy.MCD]:.2e} over {points} schedules "
        f"({skipped} MCD points with nu > 1 excluded), {elapsed:.1f} s"
    )


def check_optimality():
    rng = np.random.default_rng(3)
    worst = 0.0
    n = 0
    while n < 100:
        theta = rng.uniform(0.01, PI / 2 - 0.01)
        p = rng.uniform(0.001, med_threshold(theta))
        if p >= med_threshold(theta):
            continue
        mu_star, _ = brute_force_optimize_med(p, theta)
        worst = max(worst, abs(mu_star - med_mu(p, theta)))
        n += 1
    p, theta = 0.3, PI / 12
    _, s_star = brute_force_optimize_med(p, theta)
    excess = s_star - float(med_objective(med_mu(p, theta, MuConvention.PRINTED), p, theta))
    ok = worst <= 1e-5 and excess > 1e-6
    return ok, f"max |mu_grid - mu| {worst:.2e}; optimum beats printed mu by {excess:.6f}"


def check_confidence_triple():
    p, theta = 0.1, PI / 3
    povm_value = mcd_confidence_quantum(p, theta)
    oracle = max_confidence_eigen_oracle(mirror_ensemble(p, theta), 1)
    closed = mcd_confidence_closed_form(p, theta)
    bound = mcd_confidence_noncontextual(p, theta)
    g = bounds_report(p, theta, Strategy.MCD).gap
    ok = (
        all(abs(v - 0.5294118) <= 1e-7 for v in (povm_value, oracle, closed))
        and max(abs(povm_value - oracle), abs(povm_value - closed)) <= 1e-10
        and abs(povm_value - 9 / 17) <= 1e-10
        and abs(bound - 0.3076923) <= 1e-7
        and abs(bound - 4 / 13) <= 1e-12
        and abs(g - 0.2217195) <= 1e-7
    )
    return ok, f"C_Q {povm_value:.10f} / {oracle:.10f} / {closed:.10f}, C_lambda {bound:.10f}, gap {g:.7f}"


def check_region_structure():
    worst = max(gap(p, PI / 4, Strategy.MED) for p in np.linspace(1e-3, 0.5, 1000))
    a = bounds_report(0.4, PI / 12, Strategy.MED)
    b = bounds_report(0.45, 5 * PI / 12, Strategy.MED)
    root = equality_locus(Strategy.MED, PI / 12)
    ok = (
        worst <= 1e-9
        and a.advantage and abs(a.gap - 0.0866) <= 1e-4
        and b.advantage and abs(b.gap - 0.0192) <= 1e-3
        and root is not None and 0.30 < root < 0.35
    )
    return ok, (
        f"max gap at pi/4 {worst:.2e}; gap(0.4, pi/12) {a.gap:.5f}; gap(0.45, 5pi/12) {b.gap:.5f}; "
        f"MED locus at pi/12 {root:.7f}"
    )


def check_waveplates():
    prep_a = [s.angle for s in preparation_settings(mirror_ensemble(0.3, PI / 12))]
    prep_b = [s.angle for s in preparation_settings(mirror_ensemble(0.1, PI / 3))]
    mcd_plates = {s.element_id: s for s in angles_for_schedule(compile_strategy(0.1, PI / 3, Strategy.MCD)[0])}
    med_plates = {s.element_id: s for s in angles_for_schedule(schedule_med(0.3, PI / 12, MuConvention.PRINTED))}
    h3_mcd = mcd_plates["H3"].in_units_of_pi()
    h3_med = med_plates["H3"].in_units_of_pi()
    fixed = all(
        plates["H2"].angle == PI / 4 and plates["H5"].angle == PI / 4 and plates["H4"].angle == PI / 8
        for plates in (mcd_plates, med_plates)
    )
    ok = (
        prep_a == [PI / 24, -PI / 24, 0.0]
        and prep_b == [PI / 6, -PI / 6, 0.0]
        and abs(h3_mcd - 0.0162) <= 0.0005
        and abs(h3_med - 0.0381) <= 0.0005
        and fixed
    )
    return ok, f"H3 MCD {h3_mcd:.6f} pi, H3 MED printed {h3_med:.6f} pi, H1/H2/H4/H5 exact {fixed}"


def _estimate(p, theta, strategy, n_photons, seed=0):
    schedule, povm = compile_strategy(p, theta, strategy)
    records = simulate_counts(
        mirror_ensemble(p, theta), povm, derive_outcome_map(schedule, povm), n_photons, 30, seed,
        schedule=schedule,
    )
    return estimate_figure_of_merit(records, strategy)


def check_monte_carlo():
    start = time.perf_counter()
    parts = []
    ok = True
    for p, theta, strategy, analytic in (
        (0.4, PI / 12, Strategy.MED, med_success_quantum(0.4, PI / 12)),
        (0.1, PI / 3, Strategy.MCD, mcd_confidence_quantum(0.1, PI / 3)),
    ):
        big = _estimate(p, theta, strategy, 100_000)
        small = _estimate(p, theta, strategy, 1_000)
        ratio = small.std / big.std
        within = abs(big.mean - analytic) <= 5 * big.std
        ok = ok and within and 8.0 <= ratio <= 12.0
        parts.append(f"{strategy.value} mean {big.mean:.5f} vs {analytic:.5f} (sd {big.std:.5f}), ratio {ratio:.2f}")
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 60.0
    return ok, "; ".join(parts) + f", {elapsed:.1f} s"


def check_branch_continuity():
    rng = np.random.default_rng(8)
    worst_jump, worst_mu = 0.0, 0.0
    for theta in rng.uniform(0.05, PI / 2 - 0.05, 20):
        pstar = med_threshold(theta)
        jump = abs(med_success_quantum(pstar - 1e-6, theta) - med_success_quantum(pstar + 1e-6, theta))
        worst_jump = max(worst_jump, jump)
        worst_mu = max(worst_mu, abs(med_mu(pstar, theta) - 1.0))
    ok = worst_jump <= 1e-4 and worst_mu <= 1e-6
    return ok, f"max |S_Q jump| {worst_jump:.2e}, max |mu(p*) - 1| {worst_mu:.2e}"


def check_determinism(tmp_dir):
    outputs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_dir / name
        subprocess.run(
            [sys.executable, "-m", "mirrorqsd", "scan", "--strategy", "mcd",
             "--p-range", "0.05", "0.5", "6", "--theta-range", "pi/12", "5pi/12", "4",
             "--photons", "2000", "--runs", "5", "--seed", "13", "--output", str(path)],
            check=True, capture_output=True,
        )
        outputs.append(path.read_bytes())
    ok = outputs[0] == outputs[1] and len(outputs[0]) > 0
    return ok, f"two scans, {len(outputs[0])} bytes each, identical {outputs[0] == outputs[1]}"


def test_1_povm_validity(report):
    assert report(1, *check_povm_validity())


def test_2_walk_equivalence(report):
    assert report(2, *check_walk_equivalence())


def test_3_optimality_oracle(report):
    assert report(3, *check_optimality())


def test_4_confidence_triple(report):
    assert report(4, *check_confidence_triple())


def test_5_region_structure(report):
    assert report(5, *check_region_structure())


def test_6_waveplates(report):
    assert report(6, *check_waveplates())


def test_7_monte_carlo(report):
    assert report(7, *check_monte_carlo())


def test_8_branch_continuity(report):
    assert report(8, *check_branch_continuity())


def test_9_determinism(report, tmp_path):
    assert report(9, *check_determinism(tmp_path))


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    checks = [check_povm_validity, check_walk_equivalence, check_optimality, check_confidence_triple,
              check_region_structure, check_waveplates, check_monte_carlo, check_branch_continuity]
    results = [fn() for fn in checks]
    with tempfile.TemporaryDirectory() as tmp:
        results.append(check_determinism(Path(tmp)))
    for n, (ok, detail) in enumerate(results, start=1):
        print(f"ACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}")
    sys.exit(0 if all(ok for ok, _ in results) else 1)
