#!/usr/bin/env python3
"""Batch demonstration: generate a spread of instances, solve each with every
applicable algorithm, verify the outputs, and aggregate a report table.

Usage:
    python3 scripts/run_experiments.py [workdir]

Everything is driven through the CLI entry points, so this doubles as an
end-to-end exercise of the file formats and exit codes.
"""

import sys
import tempfile
from pathlib import Path

from molp.cli import main as molp


def sh(*argv) -> None:
    code = molp(list(argv))
    if code != 0:
        raise SystemExit(f"command failed ({code}): {' '.join(argv)}")


def run(workdir: Path) -> None:
    runs = workdir / "runs"
    runs.mkdir(parents=True, exist_ok=True)

    instances = []
    staircase = workdir / "staircase.molp"
    sh("gen", "--family", "thm2", "--eps", "1", "--n", "4", "--out", str(staircase))
    instances.append(("staircase", staircase, "1"))

    for seed in (7, 11, 13):
        path = workdir / f"random-{seed}.molp"
        sh(
            "gen", "--family", "random", "--p", "2", "--count", "12",
            "--m-target", "3", "--seed", str(seed), "--out", str(path),
        )
        instances.append((f"random-{seed}", path, "4641/10000"))

    gadget = workdir / "partition.molp"
    sh("gen", "--family", "thm6", "--a", "1,1,2", "--eps", "1/4", "--out", str(gadget))
    instances.append(("partition", gadget, "1/4"))

    graph = workdir / "diamond.molp"
    graph.write_text(
        "molp graph\nnodes 4\nsource 0\ntarget 3\n"
        "edge 0 1 1 4\nedge 1 3 1 4\nedge 0 2 4 1\nedge 2 3 4 1\nedge 0 3 3 3\n",
        encoding="utf-8",
    )
    instances.append(("diamond", graph, "1"))

    for label, path, eps in instances:
        kind = path.read_text().split()[1]
        algorithms = {
            "explicit": ("grid", "adaptive", "dy", "greedy", "existence"),
            "sched": ("grid", "adaptive", "dy", "greedy"),
            "graph": ("grid", "adaptive", "dy", "greedy"),
        }[kind]
        for alg in algorithms:
            stem = f"{label}-{alg}"
            solution = runs / f"{stem}.solution"
            sh(
                "solve", "--alg", alg, "--eps", eps, "--input", str(path),
                "--out", str(solution),
                "--metrics-out", str(runs / f"{stem}.metrics"),
                "--audit-out", str(runs / f"{stem}.audit"),
                "--compute-min",
            )
            sh("verify", "--input", str(path), "--solution", str(solution))

    report = workdir / "report.tsv"
    sh("report", "--dir", str(runs), "--out", str(report))
    print(report.read_text())
    print(f"artifacts under {workdir}")


if __name__ == "__main__":
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="molp-"))
    run(target)
