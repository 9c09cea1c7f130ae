"""Steady-state pairwise entanglement over the two magnon detunings; unstable cells stay empty."""

from _common import run

if __name__ == "__main__":
    run("ent-map", "fig4")
