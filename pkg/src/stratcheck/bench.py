"""Parameterized benchmark families emitted as specification text.

The tunnel family tgc(n) has one controller and n trains. The
controller grants entry to train i with enter_i and acknowledges its
exit with exit_i; each train walks its private cycle back to waiting
with back_i. Train i raises busy_i while it holds the tunnel, and the
bundled formula asks whether the controller can keep any two trains
from holding it at once. tgc(2) is the two-train fixture under a
systematic renaming (a1,b1,a2,b2,a3,b3 become enter_1, enter_2,
exit_1, exit_2, back_1, back_2).

With a single train there is no conflicting pair, so tgc(1) degrades
to asking that the tunnel stay empty, which no controller strategy
achieves: its only choice at G is to let the train in.
"""

from itertools import combinations

FAMILIES = ("tgc",)


def generate_benchmark(family="tgc", n=2):
    """Spec text for the family instance; n is the number of trains."""
    if family not in FAMILIES:
        raise ValueError("unknown benchmark family %r" % (family,))
    if not isinstance(n, int) or n < 1:
        raise ValueError("benchmark size must be a positive integer")

    lines = ["%% tunnel benchmark with %d train(s), generated" % n]
    lines.append("AGENT Controller:")
    lines.append("  INIT: G")
    for i in range(1, n + 1):
        lines.append("  G -> R : enter_%d" % i)
    for i in range(1, n + 1):
        lines.append("  R -> G : exit_%d" % i)
    for i in range(1, n + 1):
        lines.append("AGENT Train%d:" % i)
        lines.append("  INIT: W")
        lines.append("  W -> T : enter_%d SET busy_%d=true" % (i, i))
        lines.append("  T -> A : exit_%d SET busy_%d=false" % (i, i))
        lines.append("  A -> W : back_%d" % i)
    lines.append("PROPOSITIONS: " + ", ".join("busy_%d" % i for i in range(1, n + 1)))
    lines.append("COALITION: Controller")
    if n == 1:
        objective = "!busy_1"
    else:
        clashes = " | ".join("busy_%d & busy_%d" % (i, j)
                             for i, j in combinations(range(1, n + 1), 2))
        objective = "!(%s)" % clashes
    lines.append("FORMULA: <<Controller>> G " + objective)
    return "\n".join(lines) + "\n"
