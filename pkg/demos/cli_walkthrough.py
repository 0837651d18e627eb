"""
Command line
============

The ``maxmarginal`` command reads plain CSV files (one row per sample,
optional header).  This script writes a pair of files and runs the three
sub-commands through the same entry point the console script uses.
"""

import tempfile
from pathlib import Path

from maxmarginal import gen_increasing_dep
from maxmarginal.cli import main
from maxmarginal.csvio import write_matrix

workdir = Path(tempfile.mkdtemp())
x, y = gen_increasing_dep("linear", 40, 20, 10, 2, seed=5)
write_matrix(workdir / "x.csv", x)
write_matrix(workdir / "y.csv", y)


def run(*args):
    print("$ maxmarginal", " ".join(str(a) for a in args))
    code = main([str(a) for a in args])
    print(f"(exit {code})\n")


run("stat", workdir / "x.csv", workdir / "y.csv", "--grid", workdir / "grid.csv")
run("test", workdir / "x.csv", workdir / "y.csv", "--method", "avg")
run("test", workdir / "x.csv", workdir / "y.csv", "--test", "permutation",
    "--permutations", 999, "--seed", 1)
run("power", "--preset", "figure2", "--relationship", "linear", "--replicates", 20,
    "--out", workdir / "power.csv")
print((workdir / "power.csv").read_text())

# a three-row file is rejected with exit code 2
(workdir / "tiny.csv").write_text("1\n2\n3\n")
run("stat", workdir / "tiny.csv", workdir / "tiny.csv")
