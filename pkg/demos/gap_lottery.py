"""The general mechanism: a coin between the best single edge and a
threshold ladder, and how its expected welfare compares to OPT.

    python demos/gap_lottery.py
"""

import random

from tafm.audit import audit_instance, brute_force_optimal
from tafm.cli import generate, parse_alphabet
from tafm.core import EdgeSet, Variant, welfare
from tafm.rounding import gap_mechanism, ladder_depth

alphabet = parse_alphabet("values=1,2,3,5,8;sizes=1,2;capacities=1,2,3")
rng = random.Random(7)

print(f"{'n x m':<6} {'|E|':>4} {'OPT':>5} {'E[w]':>10} {'ratio':>8}  bound")
for _ in range(8):
    n, m = rng.randint(1, 3), rng.randint(1, 3)
    inst, _ = generate(Variant.GAP, n, m, rng.randrange(10**6), alphabet)
    E = EdgeSet.full(n, m)
    lot = gap_mechanism(inst, E)
    got = welfare(lot, inst, E)
    opt = brute_force_optimal(inst, E)[1]
    ratio = f"{float(opt / got):.3f}" if got else "-"
    print(f"{n}x{m:<4} {len(E):>4} {str(opt):>5} {str(got):>10} {ratio:>8}  {16 * (ladder_depth(n) + 1)}")

# Truthful in expectation on a fresh instance, checked over all its edge sets.
inst, _ = generate(Variant.GAP, 2, 2, 42, alphabet)
rep = audit_instance("gap_mechanism", inst, "demo-2x2")
print(f"\nexhaustive audit of a 2x2 instance: {rep.verdict}, "
      f"{rep.edge_sets_checked} edge sets, {rep.deviations_checked} misreports")
