"""Run the full identity suite over every catalog system and summarize.

Usage:  python3 demos/catalog_checkup.py [samples]

For each registered system this samples the chart box, builds the bivector
pair and its recursion operator, runs every applicable check (structure,
modular routes, ladder identities, symmetry families, closed forms, and the
two deliberately-broken controls), and prints one summary line per check.
"""

import sys

from pnhier.report import summary_lines, verify_report
from pnhier.systems import SYSTEMS, make_system

samples = int(sys.argv[1]) if len(sys.argv) > 1 else 60

for key in SYSTEMS:
    system = make_system(key, 2)
    report = verify_report(system, samples=samples, seed=42)
    print(f"=== {system.title} (n=2, {system.m} coordinates, "
          f"{samples} points) ===")
    for line in summary_lines(report):
        print("  " + line)
    verdict = "all checks passed" if report["all_pass"] else \
        f"FAILED: {', '.join(report['failed'])}"
    print(f"  -> {verdict}")
    print()
