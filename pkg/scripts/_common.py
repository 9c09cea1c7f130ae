"""Shared helpers for the experiment scripts: run a CLI preset into results/."""

from pathlib import Path

from magnon_sim.cli import main

RESULTS = Path(__file__).resolve().parent.parent / "results"


def run(command: str, preset: str, *extra: str) -> int:
    RESULTS.mkdir(exist_ok=True)
    out = RESULTS / f"{preset}_{command}.csv"
    code = main([command, "--preset", preset, "--output", str(out), *extra])
    print(f"{command} {preset}: exit {code}, wrote {out}")
    for line in out.read_text().splitlines():
        if line.startswith("#") and not line.startswith("# config"):
            print("   ", line[1:].strip())
    return code
