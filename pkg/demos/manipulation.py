"""Why the welfare-optimal matching cannot be offered without money.

Two jobs, two machines.  Job 1 likes machine 1 slightly more (value 1+eps)
but the optimum sends it to machine 2.  Hiding the edge to machine 2 makes
the optimum hand it machine 1 instead.  The greedy matching has nothing to
gain from such a lie, at the cost of a factor up to 2 in welfare.

    python demos/manipulation.py
"""

from tafm.audit import audit_strategyproofness, brute_force_optimal
from tafm.core import welfare
from tafm.fixtures import intro_instance, tight_greedy
from tafm.mech_match import mwbm_greedy, mwbm_optimal_baseline


def show(label, a, inst, E):
    pairs = ", ".join(f"job {i + 1}->m{j + 1}" for i, j in a.edges()) or "nothing"
    print(f"  {label:<10} {pairs:<28} welfare {welfare(a, inst, E)}")


fx = intro_instance("1/4")
inst, E = fx.instance, fx.edges
print("true edges:", sorted((i + 1, j + 1) for i, j in E))
show("optimal", mwbm_optimal_baseline(inst, E), inst, E)
show("greedy", mwbm_greedy(inst, E), inst, E)

print("\nauditing every unilateral misreport:")
for name in ("mwbm_optimal_baseline", "mwbm_greedy"):
    rep = audit_strategyproofness(name, inst, E)
    print(f"  {name}: {rep.verdict}")
    for w in rep.witnesses:
        print("    " + w.describe())

# The lie in action: job 1 reports only machine 1.
lie = E.with_report(0, [0])
show("after lie", mwbm_optimal_baseline(inst, lie), inst, E)

print("\nthe price of greedy shrinks toward 1/2 of OPT as eps -> 0:")
for eps in ("1/2", "1/8", "1/64", "1/512"):
    t = tight_greedy(eps)
    opt = brute_force_optimal(t.instance, t.edges)[1]
    got = welfare(mwbm_greedy(t.instance, t.edges), t.instance, t.edges)
    print(f"  eps={eps:<6} OPT/greedy = {opt / got} ~ {float(opt / got):.4f}")
assert opt / got < 2
