"""Driven three-mode dynamics against the RWA model at the reference parameters."""

from _common import run

if __name__ == "__main__":
    run("params", "fig2")
    # exit code 3 means the two models differ by more than 10% in steady state
    run("compare", "fig2", "--check")
