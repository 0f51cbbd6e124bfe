#!/usr/bin/env python3
"""Planted-product sweep: densities 2^-1 .. 2^-5 at p = 2, two factors.

Writes sweep.csv next to this script.  The achieved-codimension column grows
affinely with log_2(1/density) and stays below the budget column; rerunning
with the same seed reproduces the file byte for byte.
"""

from pathlib import Path

from mlvariety.cli import main

OUT = Path(__file__).resolve().parent / "sweep.csv"

if __name__ == "__main__":
    code = main([
        "sweep",
        "--p", "2",
        "--dims", "3,3",
        "--gen", "product",
        "--logdensities", "1,2,3,4,5",
        "--seed", "2718",
        "--output", str(OUT),
    ])
    print(OUT.read_text())
    raise SystemExit(code)
