"""From a fractional knapsack assignment to a lottery over integral ones.

The fractional mechanism may split a job between machines.  Halving that
split, we write x/2 exactly as a convex combination of feasible integral
assignments and draw from it.  Every job then gets precisely half of its
fractional utility in expectation, so truthfulness carries over.

    python demos/rounding_pipeline.py
"""

from tafm.core import EdgeSet, Instance, Variant, utility, welfare
from tafm.mech_frac import mkp_fractional
from tafm.rounding import compose_mechanism, decompose_scaled


def fmt(a):
    return "[" + ", ".join("-" if j is None else f"m{j + 1}" for j in a.jobs) + "]"


inst = Instance.create(
    values=[[6, 6], [5, 5], [3, 3]],
    sizes=[[2, 2], [2, 2], [2, 2]],
    capacities=[3, 2],
    variant=Variant.MKP,
)
E = EdgeSet.full(3, 2)

x = mkp_fractional(inst, E)
print("fractional x (rows = jobs):")
for i, row in enumerate(x.x):
    print(f"  job {i + 1}: " + "  ".join(str(v) for v in row))
print("welfare:", welfare(x, inst, E))

dec = decompose_scaled(x, inst, E)
print(f"\nx/2 as {len(dec.support)} weighted integral points:")
for a, lam in dec.support:
    print(f"  {str(lam):>6}  {fmt(a)}")
print("weights sum to", dec.weights_total(), "| re-summation exact:", dec.resum() == x.scaled("1/2"))

lottery = compose_mechanism(mkp_fractional, inst, E)
print("\nper-job utility, fractional vs lottery:")
for i in range(inst.n):
    uf, ul = utility(i, x, E, inst), utility(i, lottery, E, inst)
    print(f"  job {i + 1}: {uf} -> {ul}")
    assert ul * 2 == uf

print("one realized draw (seed 3):", fmt(lottery.sample(3)))
