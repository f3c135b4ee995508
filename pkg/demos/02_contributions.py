"""
Contributions in a three-organization pool
==========================================

Organizations a and b each own one machine and release two unit jobs at
time 0. Organization c owns a machine and has no work. We compute the
value of every coalition at t=2, the exact contributions, and watch the
exact fair scheduler keep utilities close to contributions.
"""

from fairsched import Job, MachineAllocation, exact_fair_run, exact_shapley, shapley_by_permutations

values = {
    frozenset(): 0,
    frozenset("a"): 3, frozenset("b"): 3, frozenset("c"): 0,
    frozenset("ab"): 6, frozenset("ac"): 4, frozenset("bc"): 4,
    frozenset("abc"): 7,
}

# %%
# The game is not supermodular: v(abc) + v(c) < v(ac) + v(bc).
print("v(abc) + v(c) =", values[frozenset("abc")] + values[frozenset("c")])
print("v(ac) + v(bc) =", values[frozenset("ac")] + values[frozenset("bc")])

# %%
# The subset formula and the average over join orders agree exactly.
phi = exact_shapley(values, "abc")
print({u: str(x) for u, x in sorted(phi.items())})
assert phi == shapley_by_permutations(values, "abc")

# %%
# The scheduler rebuilds the same coalition values from its own
# subcoalition schedules. The trace gives utilities and contributions
# per step.
jobs = [Job(0, 0, 0, 1), Job(0, 1, 0, 1), Job(1, 0, 0, 1), Job(1, 1, 0, 1)]
run = exact_fair_run(jobs, MachineAllocation([1, 1, 1]), 4, trace=True)
for row in run.trace:
    print(f"t={row.t}  utility={row.psi}  contribution={tuple(str(x) for x in row.phi)}")

# %%
# c has no jobs, so its contribution can never turn into utility. The
# scheduler can only balance a and b against each other.
