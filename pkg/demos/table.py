"""Print the logic-by-property verdict matrix at a modest trial count.

Run: python3 demos/table.py [trials]
"""
import sys

from ldl.logics import all_logics
from ldl.properties import format_text, run_matrix

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
verdicts = run_matrix(all_logics(), trials=trials, seed=7)
print(format_text(verdicts))
for v in verdicts:
    if v.verdict == "fails" and v.property != "weak_smoothness":
        print(f"{v.logic:>12} {v.property:<26} witness {v.witness}")
