"""The fixed-threshold rule engine: the classical baseline.

Three rules fire on hard limits — methods over 20 lines, functions with
more than 10 decision paths, modules touching more than 5 imports.  The
engine names the offending function but never proposes where to split;
that asymmetry is exactly what the learned models are compared against.
"""

from refactorlab.rules import (
    HIGH_COMPLEXITY_CC,
    HIGH_COUPLING_DEPS,
    LONG_METHOD_LINES,
    analyze_rules,
    classify_rules,
)
from refactorlab.minipy.parser import parse_source

HOT = """\
import os
import sys
import net
import db
import ui
import log

def audit(n):
    score = 0
    flags = os.stat(n)
    conn = net.open(n)
    rows = db.query(n)
    for i in range(n):
        if i > 1:
            score = score + 1
        if i > 2:
            score = score + 2
        if i > 3:
            score = score + 3
        if i > 4:
            score = score + 4
        if i > 5:
            score = score + 5
        if i > 6:
            score = score + 6
        if i > 7:
            score = score + 7
        if i > 8:
            score = score + 8
        if i > 9:
            score = score + 9
        if i > 10:
            score = score + rows
    ui.draw(score)
    log.emit(score)
    sys.exit(conn)
    return score + flags

print(audit(12))
"""

CLEAN = """\
def double(x):
    y = x * 2
    return y

print(double(4))
"""

print(f"thresholds: lines > {LONG_METHOD_LINES:g}, "
      f"CC > {HIGH_COMPLEXITY_CC:g}, imports > {HIGH_COUPLING_DEPS:g}\n")

# --- a function that trips all three rules --------------------------------

hot = parse_source(HOT)
for f in analyze_rules(hot):
    print(f"{f.rule:<15} {f.target_name:<8} measured {f.measured:g} "
          f"(threshold {f.threshold:g}) — {f.suggestion}")
print("verdict:", "refactor" if classify_rules(hot) else "keep")

# --- and one that passes ----------------------------------------------------

clean = parse_source(CLEAN)
print("\nclean program findings:", analyze_rules(clean))
print("verdict:", "refactor" if classify_rules(clean) else "keep")
