"""Strategy-proof utility, flow time and coalition values.

A job ``(s, p)`` is treated as ``p`` unit parts executed in slots
``s, s+1, ...``. At time ``t`` every part executed in a slot ``tau < t``
is worth ``t - tau``; the utility of an organization is the sum over its
parts. All values are exact integers.
"""

from __future__ import annotations

import heapq
from typing import Iterable

from .core import Schedule, ScheduleEntry
from .errors import ContractViolation, DomainError


def _job_value(start: int, processing: int, t: int) -> int:
    n = min(processing, t - start)
    if n <= 0:
        return 0
    # sum_{tau=s}^{s+n-1} (t - tau)
    return n * (2 * (t - start) - n + 1) // 2


def psi_sp(entries: Iterable[tuple[int, int]], t: int) -> int:
    """Utility at time ``t`` of ``(start, processing)`` pairs."""
    return sum(_job_value(s, p, t) for s, p in entries if s <= t)


def flow_time(entries: Iterable[tuple[int, int, int]], t: int) -> int:
    """Total flow time of ``(release, start, processing)`` triples.

    Every job has to be finished by ``t``; a non-clairvoyant observer
    cannot tell the completion time of a running job.
    """
    total = 0
    for r, s, p in entries:
        if s + p > t:
            raise DomainError(f"job started at {s} with length {p} is not complete at {t}")
        total += s + p - r
    return total


def _entries_of(schedule: Schedule | Iterable[ScheduleEntry]) -> Iterable[ScheduleEntry]:
    return schedule.entries if isinstance(schedule, Schedule) else schedule


def org_utilities(schedule: Schedule | Iterable[ScheduleEntry], k: int, t: int) -> list[int]:
    out = [0] * k
    for e in _entries_of(schedule):
        if e.start <= t:
            out[e.job.org] += _job_value(e.start, e.job.processing, t)
    return out


def coalition_value(schedule: Schedule | Iterable[ScheduleEntry], members: Iterable[int], t: int) -> int:
    members = set(members)
    total = 0
    for e in _entries_of(schedule):
        if e.job.org not in members:
            raise ContractViolation(f"schedule holds a job of organization {e.job.org} outside {sorted(members)}")
        if e.start <= t:
            total += _job_value(e.start, e.job.processing, t)
    return total


class UtilityTracker:
    """Per-organization utility maintained alongside a running simulation.

    ``on_start`` registers a job at the current time; ``advance`` moves one
    step, which adds the number of parts executed so far to each
    organization's utility. Finished jobs are folded into two running sums
    so the cost of a query depends only on the jobs still executing.
    """

    def __init__(self, k: int, t: int = 0):
        self.time = t
        self._parts = [0] * k
        self._slot_sum = [0] * k
        self._active: list[tuple[int, int, int]] = []  # (end, start, org)

    def on_start(self, org: int, processing: int, t: int) -> None:
        if t != self.time:
            raise ContractViolation(f"tracker at t={self.time} got a start at t={t}")
        heapq.heappush(self._active, (t + processing, t, org))

    def advance(self) -> None:
        self.advance_to(self.time + 1)

    def advance_to(self, t: int) -> None:
        if t < self.time:
            raise ContractViolation(f"tracker clock moved backwards: {self.time} -> {t}")
        active = self._active
        while active and active[0][0] <= t:
            end, s, u = heapq.heappop(active)
            p = end - s
            self._parts[u] += p
            self._slot_sum[u] += p * s + p * (p - 1) // 2
        self.time = t

    def value(self, org: int, at: int | None = None) -> int:
        h = self.time if at is None else at
        if h < self.time:
            raise ContractViolation("utility queried before the tracker clock")
        total = self._parts[org] * h - self._slot_sum[org]
        for end, s, u in self._active:
            if u == org:
                total += _job_value(s, end - s, h)
        return total

    def values(self, at: int | None = None) -> list[int]:
        h = self.time if at is None else at
        if h < self.time:
            raise ContractViolation("utility queried before the tracker clock")
        out = [n * h - ss for n, ss in zip(self._parts, self._slot_sum)]
        for end, s, u in self._active:
            out[u] += _job_value(s, end - s, h)
        return out

    def executed(self, org: int) -> int:
        """Unit parts of ``org`` executed in slots before the current time."""
        done = self._parts[org]
        for end, s, u in self._active:
            if u == org:
                done += max(0, min(end, self.time) - s)
        return done
