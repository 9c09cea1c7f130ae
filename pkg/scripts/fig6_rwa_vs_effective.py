"""Magnon populations of the RWA and adiabatically eliminated models at large detuning."""

from _common import run

if __name__ == "__main__":
    run("compare", "fig6", "--check")
