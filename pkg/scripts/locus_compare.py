"""Tabulate the numerically solved equality locus against the closed-form MCD curve."""

import argparse
import math

import numpy as np

from mirrorqsd.scan import equality_locus, printed_mcd_locus


def fmt(value):
    return "-" if value is None else f"{value:.7f}"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=17, help="number of theta values in (0, pi/2)")
    args = parser.parse_args()

    print(f"{'theta/pi':>9} {'MED root':>10} {'MCD root':>10} {'1/(4sin^2)':>11} {'printed':>10}")
    for theta in np.linspace(0, math.pi / 2, args.count + 2)[1:-1]:
        med = equality_locus("med", theta)
        mcd = equality_locus("mcd", theta)
        tangent = 1 / (4 * math.sin(theta) ** 2)
        print(
            f"{theta / math.pi:9.4f} {fmt(med):>10} {fmt(mcd):>10} "
            f"{fmt(tangent if tangent <= 0.5 + 1e-12 else None):>11} {printed_mcd_locus(theta):10.4f}"
        )


if __name__ == "__main__":
    main()
