"""Coalitions, schedules and the discrete-time greedy simulation engine."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import CapacityError, ContractViolation
from .workload import Job, MachineAllocation, jobs_by_org

MAX_COALITION = 20


# -- coalitions -------------------------------------------------------------

def mask_of(members: Iterable[int]) -> int:
    mask = 0
    for u in members:
        mask |= 1 << u
    return mask


def members_of(mask: int) -> list[int]:
    out = []
    u = 0
    while mask:
        if mask & 1:
            out.append(u)
        mask >>= 1
        u += 1
    return out


def enumerate_subcoalitions(coalition: Iterable[int]) -> Iterator[frozenset[int]]:
    """All subsets of ``coalition``, by size and then lexicographically."""
    members = sorted(set(coalition))
    if len(members) > MAX_COALITION:
        raise CapacityError(f"coalition of {len(members)} exceeds cap of {MAX_COALITION}")
    for size in range(len(members) + 1):
        for combo in combinations(members, size):
            yield frozenset(combo)


def masks_by_size(k: int) -> list[int]:
    """Non-empty coalition masks over ``k`` organizations, smallest first."""
    return sorted(range(1, 1 << k), key=lambda m: (bin(m).count("1"), m))


# -- schedules --------------------------------------------------------------

@dataclass(frozen=True)
class ScheduleEntry:
    job: Job
    start: int
    machine: int

    @property
    def end(self) -> int:
        return self.start + self.job.processing


@dataclass
class Schedule:
    entries: list[ScheduleEntry] = field(default_factory=list)
    horizon: int = 0

    def __iter__(self) -> Iterator[ScheduleEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def by_org(self, k: int) -> list[list[tuple[int, int]]]:
        """``(start, processing)`` pairs per organization."""
        out: list[list[tuple[int, int]]] = [[] for _ in range(k)]
        for e in self.entries:
            out[e.job.org].append((e.start, e.job.processing))
        return out

    def start_of(self) -> dict[tuple[int, int], int]:
        return {(e.job.org, e.job.seq): e.start for e in self.entries}


# -- simulation state -------------------------------------------------------

class SimState:
    """Mutable state of one greedy simulation over a set of organizations.

    Only the machines owned by ``orgs`` take part. The clock only moves
    forward; :meth:`advance` releases every job due by the new time.
    """

    def __init__(
        self,
        jobs: Iterable[Job],
        allocation: MachineAllocation,
        orgs: Iterable[int] | None = None,
        *,
        grouped: list[list[Job]] | None = None,
    ):
        k = allocation.k
        self.orgs = sorted(range(k) if orgs is None else set(orgs))
        if grouped is None:
            grouped = jobs_by_org(jobs, k)
        self.machines = [m for u in self.orgs for m in allocation.machines_of(u)]
        self.busy_until = {m: 0 for m in self.machines}
        self.running: dict[int, ScheduleEntry] = {}
        self._pending = {u: deque(grouped[u]) for u in self.orgs}
        self.queues: dict[int, deque[Job]] = {u: deque() for u in self.orgs}
        self.clock = 0
        self.entries: list[ScheduleEntry] = []

    def advance(self, t: int) -> list[Job]:
        if t < self.clock:
            raise ContractViolation(f"clock moved backwards: {self.clock} -> {t}")
        self.clock = t
        released = []
        for u, pending in self._pending.items():
            while pending and pending[0].release <= t:
                job = pending.popleft()
                self.queues[u].append(job)
                released.append(job)
        for m in [m for m, e in self.running.items() if e.end <= t]:
            del self.running[m]
        return released

    def free_machines(self) -> list[int]:
        return [m for m in self.machines if self.busy_until[m] <= self.clock]

    def waiting_orgs(self) -> list[int]:
        return [u for u in self.orgs if self.queues[u]]

    def has_waiting(self) -> bool:
        return any(self.queues[u] for u in self.orgs)

    def start(self, org: int, machine: int) -> ScheduleEntry:
        queue = self.queues.get(org)
        if not queue:
            raise ContractViolation(f"organization {org} has no waiting job at t={self.clock}")
        if self.busy_until[machine] > self.clock:
            raise ContractViolation(f"machine {machine} is busy at t={self.clock}")
        job = queue.popleft()
        entry = ScheduleEntry(job, self.clock, machine)
        self.busy_until[machine] = entry.end
        self.running[machine] = entry
        self.entries.append(entry)
        return entry

    def next_event(self) -> int | None:
        """Earliest future time at which a release or a completion happens."""
        times = [p[0].release for p in self._pending.values() if p]
        times.extend(e.end for e in self.running.values())
        later = [x for x in times if x > self.clock]
        return min(later) if later else None


Policy = Callable[[SimState, int], int]


def simulate(jobs: Sequence[Job], allocation: MachineAllocation, policy: Policy, t_end: int) -> Schedule:
    """Greedy FIFO simulation driven by an organization-selection callback.

    At each time step releases come first; then, while a machine is free
    and a job waits, ``policy(state, t)`` names the organization whose head
    job starts on the lowest-id free machine. Time steps in which nothing
    can change are skipped.
    """
    state = SimState(jobs, allocation)
    t: int | None = 0
    while t is not None and t <= t_end:
        state.advance(t)
        free = state.free_machines()
        while free and state.has_waiting():
            org = policy(state, t)
            state.start(org, free.pop(0))
        t = state.next_event()
    return Schedule(state.entries, horizon=t_end)


def fifo_policy(state: SimState, t: int) -> int:
    """Earliest-released head job first, ties to the lowest organization id."""
    return min(state.waiting_orgs(), key=lambda u: (state.queues[u][0].release, u))


# -- validation -------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str  # "overlap" | "fifo" | "greedy" | "early" | "machine" | "duplicate" | "unknown-job"
    time: int
    machine: int | None = None
    job: Job | None = None
    detail: str = ""


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def __bool__(self) -> bool:
        return self.ok


def validate_schedule(schedule: Schedule, jobs: Sequence[Job], allocation: MachineAllocation) -> ValidationReport:
    """Check no-overlap, FIFO, greediness and release constraints.

    Greediness is checked for every ``t`` in ``[0, schedule.horizon]``
    against the jobs released by then.
    """
    horizon = schedule.horizon
    viol: list[Violation] = []
    known = set(jobs)
    seen: set[Job] = set()
    per_machine: dict[int, list[ScheduleEntry]] = {}
    for e in schedule.entries:
        if e.job not in known:
            viol.append(Violation("unknown-job", e.start, e.machine, e.job))
        if e.job in seen:
            viol.append(Violation("duplicate", e.start, e.machine, e.job))
        seen.add(e.job)
        if not 0 <= e.machine < allocation.total:
            viol.append(Violation("machine", e.start, e.machine, e.job))
        if e.start < e.job.release:
            viol.append(Violation("early", e.start, e.machine, e.job, f"release {e.job.release}"))
        per_machine.setdefault(e.machine, []).append(e)

    for m, lst in per_machine.items():
        lst.sort(key=lambda e: e.start)
        for a, b in zip(lst, lst[1:]):
            if b.start < a.end:
                viol.append(Violation("overlap", b.start, m, b.job, f"overlaps job {a.job.org}/{a.job.seq}"))

    start_of = {e.job: e.start for e in schedule.entries}
    for org_jobs in jobs_by_org(jobs, allocation.k):
        prev_start = None
        prev_job = None
        for job in org_jobs:
            s = start_of.get(job)
            if s is None:
                prev_start, prev_job = None, job
                continue
            if prev_job is not None and (prev_start is None or s < prev_start):
                viol.append(Violation("fifo", s, None, job, f"started before seq {prev_job.seq}"))
            prev_start, prev_job = s, job

    if horizon >= 0:
        size = horizon + 2
        busy = np.zeros(size, dtype=np.int64)
        waiting = np.zeros(size, dtype=np.int64)
        for e in schedule.entries:
            if e.start <= horizon:
                busy[max(e.start, 0)] += 1
                busy[min(e.end, horizon + 1)] -= 1
        for job in jobs:
            if job.release > horizon:
                continue
            waiting[job.release] += 1
            s = start_of.get(job)
            if s is not None and s <= horizon:
                waiting[max(s, job.release)] -= 1
            else:
                waiting[horizon + 1] -= 1
        busy = np.cumsum(busy)[: horizon + 1]
        waiting = np.cumsum(waiting)[: horizon + 1]
        bad = np.nonzero((busy < allocation.total) & (waiting > 0))[0]
        for t in bad.tolist():
            viol.append(Violation("greedy", t, None, None, f"{allocation.total - busy[t]} idle, {waiting[t]} waiting"))

    viol.sort(key=lambda v: (v.time, v.kind))
    return ValidationReport(viol)
