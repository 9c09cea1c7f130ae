"""Stability maps over detunings (a-c) and couplings (d-f) of the RWA model."""

import sys

from _common import run

if __name__ == "__main__":
    panels = sys.argv[1:] or ["a", "b", "c", "d", "e", "f"]
    for panel in panels:
        run("stability-map", f"fig3{panel}")
