import pytest
from hypothesis import given, settings

from fairsched.core import (
    Schedule,
    ScheduleEntry,
    SimState,
    enumerate_subcoalitions,
    fifo_policy,
    mask_of,
    masks_by_size,
    members_of,
    simulate,
    validate_schedule,
)
from fairsched.errors import CapacityError, ContractViolation
from fairsched.workload import Job, MachineAllocation

from conftest import instances


def test_subcoalitions_order():
    subs = list(enumerate_subcoalitions([2, 0, 1]))
    assert subs[0] == frozenset()
    assert subs[1:4] == [frozenset({0}), frozenset({1}), frozenset({2})]
    assert subs[-1] == frozenset({0, 1, 2})
    assert len(subs) == 8


def test_subcoalitions_cap():
    with pytest.raises(CapacityError):
        next(enumerate_subcoalitions(range(21)))


def test_masks():
    assert mask_of([0, 2]) == 5
    assert members_of(5) == [0, 2]
    assert masks_by_size(3) == [1, 2, 4, 3, 5, 6, 7]


def test_simulate_single_machine_fifo():
    jobs = [Job(0, 0, 0, 2), Job(0, 1, 0, 1), Job(1, 0, 1, 3)]
    s = simulate(jobs, MachineAllocation([1, 0]), fifo_policy, 10)
    assert [(e.job.org, e.job.seq, e.start) for e in s] == [(0, 0, 0), (0, 1, 2), (1, 0, 3)]
    assert validate_schedule(s, jobs, MachineAllocation([1, 0])).ok


def test_simulate_ignores_jobs_after_horizon():
    jobs = [Job(0, 0, 0, 1), Job(0, 1, 8, 1)]
    s = simulate(jobs, MachineAllocation([1]), fifo_policy, 5)
    assert len(s) == 1


def test_state_start_errors():
    state = SimState([Job(0, 0, 0, 3)], MachineAllocation([1]))
    state.advance(0)
    state.start(0, 0)
    with pytest.raises(ContractViolation):
        state.start(0, 0)
    state.queues[0].append(Job(0, 1, 0, 1))
    with pytest.raises(ContractViolation):
        state.start(0, 0)
    with pytest.raises(ContractViolation):
        state.advance(-1)


def test_restricted_state_sees_only_member_machines():
    alloc = MachineAllocation([1, 2, 1])
    state = SimState([Job(1, 0, 0, 1)], alloc, orgs=[1, 2])
    assert state.machines == [1, 2, 3]
    assert state.orgs == [1, 2]


class TestValidator:
    alloc = MachineAllocation([1, 1])
    jobs = [Job(0, 0, 0, 2), Job(0, 1, 0, 2), Job(1, 0, 1, 1)]

    def schedule(self, *rows, horizon=6):
        return Schedule([ScheduleEntry(self.jobs[i], s, m) for i, s, m in rows], horizon)

    def test_valid(self):
        assert validate_schedule(self.schedule((0, 0, 0), (1, 0, 1), (2, 2, 0)), self.jobs, self.alloc).ok

    def test_overlap(self):
        rep = validate_schedule(self.schedule((0, 0, 0), (1, 1, 0), (2, 1, 1)), self.jobs, self.alloc)
        assert "overlap" in rep.kinds()

    def test_fifo(self):
        rep = validate_schedule(self.schedule((1, 0, 0), (0, 2, 1), (2, 2, 0)), self.jobs, self.alloc)
        assert "fifo" in rep.kinds()

    def test_fifo_with_missing_predecessor(self):
        rep = validate_schedule(self.schedule((1, 0, 0), (2, 1, 1)), self.jobs, self.alloc)
        assert "fifo" in rep.kinds()

    def test_greedy(self):
        rep = validate_schedule(self.schedule((0, 0, 0), (1, 2, 0), (2, 1, 1)), self.jobs, self.alloc)
        assert rep.kinds() == {"greedy"}
        assert not rep

    def test_early(self):
        rep = validate_schedule(self.schedule((0, 0, 0), (1, 0, 1), (2, 0, 0)), self.jobs, self.alloc)
        assert "early" in rep.kinds()

    def test_machine_and_duplicate(self):
        rep = validate_schedule(self.schedule((0, 0, 5), (0, 2, 0)), self.jobs, self.alloc)
        assert {"machine", "duplicate"} <= rep.kinds()


@settings(max_examples=60, deadline=None)
@given(instances(max_k=3, max_jobs=15))
def test_simulate_output_is_always_valid(inst):
    jobs, alloc = inst
    s = simulate(jobs, alloc, fifo_policy, 25)
    assert validate_schedule(s, jobs, alloc).ok
