"""
The throughput utility on a small schedule
==========================================

Nine jobs of one organization and a single job of another share three
machines. We look at the first organization's utility, compare it with
flow time, and see how both react when the schedule changes.
"""

from fairsched import Job, MachineAllocation, flow_time, psi_sp, simulate

# Everything is released at time 0. The start order is scripted: seven jobs
# of organization 0, then organization 1's job, then the rest.
lengths = [3, 4, 2, 5, 6, 6, 2, 3, 4]
jobs = [Job(0, i, 0, p) for i, p in enumerate(lengths)] + [Job(1, 0, 0, 4)]
order = iter([0] * 7 + [1] + [0] * 5)
schedule = simulate(jobs, MachineAllocation([2, 1]), lambda state, t: next(order), 30)

pairs = schedule.by_org(2)[0]
print("starts of organization 0:", [s for s, _ in pairs])

# %%
# At t=13 the last unit of the last job has not run yet, so it is not
# counted. At t=14 every job is complete.
print("utility at 13:", psi_sp(pairs, 13))
print("utility at 14:", psi_sp(pairs, 14))
print("flow time at 14:", flow_time([(0, s, p) for s, p in pairs], 14))

# %%
# Without organization 1's job, the last job starts one step earlier.
# The utility rises by the job's length while flow time only drops by one.
earlier = pairs[:-1] + [(9, 4)]
print("gain from an earlier start:", psi_sp(earlier, 14) - psi_sp(pairs, 14))

# %%
# Starting the sixth job one step later costs its length, six.
later = list(pairs)
later[5] = (pairs[5][0] + 1, pairs[5][1])
print("loss from a later start:", psi_sp(pairs, 14) - psi_sp(later, 14))

# %%
# Dropping the last job lowers the utility. Flow time would improve by
# 14, rewarding the schedule that did less work.
print("loss from dropping the last job:", psi_sp(pairs, 14) - psi_sp(pairs[:-1], 14))

# %%
# Splitting a job into two consecutive pieces leaves the utility unchanged,
# so organizations gain nothing by reshaping their work.
for t in (5, 9, 20):
    whole = psi_sp([(2, 5)], t)
    split = psi_sp([(2, 3), (5, 2)], t)
    print(f"t={t}: whole job {whole}, split job {split}")
