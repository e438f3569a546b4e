#!/usr/bin/env python3
"""Independent recomputation of the pass/fail flags in agsplab CSV output.

Every result row stores the inequality it verified as (lhs, rhs, tol,
passed); this script re-evaluates passed == (lhs <= rhs + tol) for each row
using nothing but the stored quantities.  Exit status 0 when every flag is
consistent, 1 otherwise.

Usage: check_results.py RESULTS.csv [MORE.csv ...]
"""

import csv
import sys


REQUIRED = {"lhs", "rhs", "tol", "passed"}


def check_file(path):
    bad = 0
    with open(path, newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(lines)
    if not REQUIRED.issubset(reader.fieldnames or ()):
        print(f"{path}: no pass/fail columns (trace or auxiliary file), skipped")
        return 0
    for i, row in enumerate(reader):
        lhs = float(row["lhs"])
        rhs = float(row["rhs"])
        tol = float(row["tol"])
        stored = row["passed"].strip().lower() == "true"
        recomputed = lhs <= rhs + tol
        if stored != recomputed:
            bad += 1
            print(
                f"{path}: row {i}: stored passed={stored} but lhs={lhs!r} "
                f"rhs={rhs!r} tol={tol!r} gives {recomputed}"
            )
    return bad


def main(argv):
    if len(argv) < 2:
        print(__doc__.strip())
        return 2
    total_bad = 0
    for path in argv[1:]:
        total_bad += check_file(path)
    if total_bad:
        print(f"{total_bad} inconsistent flags")
        return 1
    print("all flags consistent")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
