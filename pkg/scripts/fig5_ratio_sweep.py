"""Magnon-magnon entanglement of the resonant model against g1/g2, for several g2 (a) and cavity decays (b)."""

from _common import run

if __name__ == "__main__":
    run("ratio-sweep", "fig5a")
    run("ratio-sweep", "fig5b")
