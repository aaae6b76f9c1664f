"""Print the plate angles and walk verification for the two experimental settings."""

import math

from mirrorqsd.model import mirror_ensemble
from mirrorqsd.optics import angles_for_schedule, preparation_settings
from mirrorqsd.strategies import MuConvention, Strategy, optimal_povm
from mirrorqsd.walk import compile_strategy, verify_schedule

SETTINGS = [
    ("MED derived", 0.3, math.pi / 12, Strategy.MED, MuConvention.DERIVED),
    ("MED printed", 0.3, math.pi / 12, Strategy.MED, MuConvention.PRINTED),
    ("MCD", 0.1, math.pi / 3, Strategy.MCD, MuConvention.DERIVED),
]


def main():
    for name, p, theta, strategy, convention in SETTINGS:
        schedule, _ = compile_strategy(p, theta, strategy, convention)
        deviation = verify_schedule(schedule, optimal_povm(p, theta, strategy), 200)
        print(f"{name}  (p = {p}, theta = {theta / math.pi:.4f} pi)")
        for s in preparation_settings(mirror_ensemble(p, theta)):
            print(f"  {s.element_id:6s} {s.in_units_of_pi():+.6f} pi")
        for s in angles_for_schedule(schedule):
            angle = "no plate" if not s.active else f"{s.in_units_of_pi():+.6f} pi"
            print(f"  {s.element_id:6s} {angle}")
        print(f"  max |P_walk - P_optimal| over 200 Haar states: {deviation:.3e}")


if __name__ == "__main__":
    main()
