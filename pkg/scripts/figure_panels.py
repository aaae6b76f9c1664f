"""Write the data behind all four figure panels into one directory.

    python3 scripts/figure_panels.py --out-dir out --photons 100000
"""

import argparse
import math
from pathlib import Path

from mirrorqsd.scan import FIGURES, ScanConfig, figure_data


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", type=Path, default=Path("figure_data"))
    parser.add_argument("--photons", type=int, default=100_000, help="0 skips the emulated points")
    parser.add_argument("--runs", type=int, default=30)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--grid", type=int, default=100, help="points per axis")
    args = parser.parse_args()

    for figure in FIGURES:
        config = ScanConfig(
            strategy="med" if figure.startswith("fig3") else "mcd",
            p_grid=(0.005, 0.5, args.grid),
            theta_grid=(0.005, math.pi / 2 - 0.005, args.grid),
            n_photons=args.photons,
            runs=args.runs,
            seed=args.seed,
        )
        for path in figure_data(figure, config, args.out_dir):
            print(path)


if __name__ == "__main__":
    main()
