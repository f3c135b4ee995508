"""
Sample size and accuracy of the sampled policy
==============================================

With unit jobs every greedy policy reaches the same coalition values, so
sampled join orders give an unbiased estimate of the contributions. We
check how often the sampled policy lands within epsilon of the exact fair
utilities, using the sample size the accuracy bound prescribes, and how
the distance shrinks as more orderings are drawn.
"""

import numpy as np

from fairsched import Job, MachineAllocation, exact_fair_run, rand_run, sample_size
from fairsched.metrics import manhattan


def unit_instance(rng, k=4, n_jobs=150):
    # few machines and bursty releases, so organizations compete for slots
    counts = rng.integers(1, 3, size=k).tolist()
    owner = rng.integers(0, k, size=n_jobs)
    jobs = []
    for u in range(k):
        releases = sorted(rng.integers(0, 16, size=int((owner == u).sum())).tolist())
        jobs.extend(Job(u, i, r, 1) for i, r in enumerate(releases))
    return jobs, MachineAllocation(counts)


eps, lam = 0.25, 0.9
print("orderings prescribed for k=4:", sample_size(4, eps, lam))

rng = np.random.default_rng(0)
instances = [unit_instance(rng) for _ in range(30)]
references = [exact_fair_run(j, a, 40) for j, a in instances]

# %%
# Relative distance to the exact fair utilities for growing samples.
for n in (1, 5, 15, 75, sample_size(4, eps, lam)):
    dist = []
    for seed, ((jobs, alloc), ref) in enumerate(zip(instances, references)):
        run = rand_run(jobs, alloc, 40, n_samples=n, seed=seed)
        dist.append(manhattan(run.utilities, ref.utilities) / sum(ref.utilities))
    within = sum(d <= eps for d in dist)
    print(f"N={n:4d}: mean relative distance {np.mean(dist):.4f}, within epsilon {within}/{len(dist)}")
