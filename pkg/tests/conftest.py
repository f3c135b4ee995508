import numpy as np
import pytest
from hypothesis import strategies as st

from fairsched import Job, MachineAllocation, simulate

# Org 0 has nine jobs released at 0; org 1 has one job that takes the
# eighth slot in the start order. Three machines.
REF_PROCESSING = [3, 4, 2, 5, 6, 6, 2, 3, 4]
REF_STARTS = [0, 0, 0, 2, 3, 4, 7, 9, 10]


def ref_jobs(with_other=True):
    jobs = [Job(0, i, 0, p) for i, p in enumerate(REF_PROCESSING)]
    if with_other:
        jobs.append(Job(1, 0, 0, 4))
    return jobs


def ref_schedule(with_other=True):
    jobs = ref_jobs(with_other)
    order = iter([0] * 7 + ([1] if with_other else []) + [0] * 5)
    return simulate(jobs, MachineAllocation([2, 1]), lambda state, t: next(order), 30)


@pytest.fixture
def ref_pairs():
    return list(zip(REF_STARTS, REF_PROCESSING))


def three_org_instance():
    """Three orgs with one machine each; a and b release two unit jobs at 0."""
    jobs = [Job(0, 0, 0, 1), Job(0, 1, 0, 1), Job(1, 0, 0, 1), Job(1, 1, 0, 1)]
    return jobs, MachineAllocation([1, 1, 1])


THREE_ORG_VALUES = {
    frozenset(): 0,
    frozenset("a"): 3, frozenset("b"): 3, frozenset("c"): 0,
    frozenset("ab"): 6, frozenset("ac"): 4, frozenset("bc"): 4,
    frozenset("abc"): 7,
}


def random_instance(rng, k, n_jobs, max_release=20, max_proc=1, max_machines=3, zero_machines=False):
    lo = 0 if zero_machines else 1
    counts = rng.integers(lo, max_machines + 1, size=k)
    if counts.sum() == 0:
        counts[0] = 1
    jobs = []
    per_org = rng.integers(0, k, size=n_jobs)
    for u in range(k):
        n = int((per_org == u).sum())
        releases = sorted(rng.integers(0, max_release + 1, size=n).tolist())
        procs = rng.integers(1, max_proc + 1, size=n).tolist()
        jobs.extend(Job(u, i, r, p) for i, (r, p) in enumerate(zip(releases, procs)))
    return jobs, MachineAllocation(counts.tolist())


@st.composite
def instances(draw, max_k=3, max_jobs=12, max_release=10, max_proc=4, max_machines=3):
    k = draw(st.integers(1, max_k))
    counts = draw(st.lists(st.integers(0, max_machines), min_size=k, max_size=k))
    if sum(counts) == 0:
        counts[0] = 1
    jobs = []
    for u in range(k):
        n = draw(st.integers(0, max_jobs // k))
        releases = sorted(draw(st.lists(st.integers(0, max_release), min_size=n, max_size=n)))
        procs = draw(st.lists(st.integers(1, max_proc), min_size=n, max_size=n))
        jobs.extend(Job(u, i, r, p) for i, (r, p) in enumerate(zip(releases, procs)))
    return jobs, MachineAllocation(counts)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
