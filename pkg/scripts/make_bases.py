"""Regenerate the weight 1/2 plus space bases shipped in singmod/data/bases."""

import argparse
from pathlib import Path

from singmod.plusspace import export_basis, half_basis

OUT = Path(__file__).resolve().parent.parent / "src" / "singmod" / "data" / "bases"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", default="2,3,5,6")
    ap.add_argument("--max-pole", type=int, default=100)
    ap.add_argument("--trunc", type=int, default=10)
    args = ap.parse_args()
    OUT.mkdir(parents=True, exist_ok=True)
    for M in map(int, args.levels.split(",")):
        forms = half_basis(M, args.max_pole, args.trunc, pool="bracket")
        path = OUT / f"half_M{M}.qs"
        export_basis(forms, path)
        print(f"M={M}: {len(forms)} forms -> {path}")


if __name__ == "__main__":
    main()
