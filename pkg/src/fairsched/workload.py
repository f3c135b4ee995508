"""Workloads: SWF trace ingestion, synthetic generation, and the split of
jobs and machines among organizations.

Parallel jobs from traces are flattened into ``k`` sequential copies, users
are mapped to organizations by a seeded uniform draw, and machines are
handed out either evenly or with Zipf weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np

from .errors import ConfigError, SWFParseError

SWF_FIELDS = 18

# 1-based SWF columns
_COL_JOB_ID = 1
_COL_SUBMIT = 2
_COL_RUN_TIME = 4
_COL_PROCS = 5
_COL_USER = 12


@dataclass(frozen=True)
class RawTraceJob:
    job_id: int
    submit_time: int
    run_time: int
    proc_count: int
    user_id: int


@dataclass(frozen=True)
class SWFTrace:
    """Accepted jobs of a trace plus the number of data lines dropped."""

    jobs: tuple[RawTraceJob, ...]
    dropped: int = 0

    def __iter__(self) -> Iterator[RawTraceJob]:
        return iter(self.jobs)

    def __len__(self) -> int:
        return len(self.jobs)


@dataclass(frozen=True, order=True)
class Job:
    """A sequential job; ``seq`` is its FIFO position inside ``org``."""

    org: int
    seq: int
    release: int
    processing: int

    def __post_init__(self):
        if self.processing < 1:
            raise ConfigError(f"job {self.org}/{self.seq}: processing must be >= 1")
        if self.release < 0:
            raise ConfigError(f"job {self.org}/{self.seq}: negative release time")


@dataclass(frozen=True)
class MachineAllocation:
    """Machine counts per organization.

    Machines get global ids in organization order: organization 0 owns ids
    ``0..counts[0]-1``, organization 1 the next block, and so on.
    """

    counts: tuple[int, ...]

    def __init__(self, counts: Iterable[int]):
        counts = tuple(int(c) for c in counts)
        if not counts:
            raise ConfigError("allocation needs at least one organization")
        if any(c < 0 for c in counts):
            raise ConfigError(f"negative machine count in {counts}")
        if sum(counts) < 1:
            raise ConfigError("allocation has no machines at all")
        object.__setattr__(self, "counts", counts)

    @property
    def k(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def machines_of(self, org: int) -> range:
        first = sum(self.counts[:org])
        return range(first, first + self.counts[org])

    def owners(self) -> list[int]:
        """Owning organization of each machine id."""
        return [u for u, c in enumerate(self.counts) for _ in range(c)]


def _parse_number(token: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise SWFParseError(lineno, f"non-numeric field {token!r}") from None


def parse_swf(stream: TextIO | Iterable[str]) -> SWFTrace:
    """Read Standard Workload Format lines.

    Lines starting with ``;`` are header comments. Jobs whose run time or
    allocated processor count is not positive are dropped and counted.
    """
    jobs = []
    dropped = 0
    for lineno, line in enumerate(stream, start=1):
        text = line.strip()
        if not text or text.startswith(";"):
            continue
        fields = text.split()
        if len(fields) != SWF_FIELDS:
            raise SWFParseError(lineno, f"expected {SWF_FIELDS} fields, got {len(fields)}")
        values = [_parse_number(f, lineno) for f in fields]
        run_time = int(values[_COL_RUN_TIME - 1])
        procs = int(values[_COL_PROCS - 1])
        submit = int(values[_COL_SUBMIT - 1])
        if run_time <= 0 or procs <= 0 or submit < 0:
            dropped += 1
            continue
        jobs.append(
            RawTraceJob(
                job_id=int(values[_COL_JOB_ID - 1]),
                submit_time=submit,
                run_time=run_time,
                proc_count=procs,
                user_id=int(values[_COL_USER - 1]),
            )
        )
    return SWFTrace(tuple(jobs), dropped)


def read_swf(path) -> SWFTrace:
    with open(path, encoding="utf-8", errors="replace") as fh:
        return parse_swf(fh)


def sequentialize(raw: Iterable[RawTraceJob]) -> list[tuple[int, int, int]]:
    """Replace every ``k``-processor job by ``k`` sequential copies.

    Returns ``(user_id, release, processing)`` triples in trace order.
    """
    out = []
    for job in raw:
        entry = (job.user_id, job.submit_time, job.run_time)
        out.extend([entry] * job.proc_count)
    return out


def scale_releases(entries: Sequence[tuple[int, int, int]], factor: float) -> list[tuple[int, int, int]]:
    if factor <= 0:
        raise ConfigError("release scale must be positive")
    if factor == 1.0:
        return list(entries)
    return [(user, math.floor(release * factor), p) for user, release, p in entries]


def time_window(entries: Sequence[tuple[int, int, int]], start: int, length: int) -> list[tuple[int, int, int]]:
    """Entries released in ``[start, start+length)``, shifted to begin at 0."""
    return [(user, r - start, p) for user, r, p in entries if start <= r < start + length]


def assign_orgs(entries: Sequence[tuple[int, int, int]], k: int, seed=None) -> list[Job]:
    """Map each user to one of ``k`` organizations uniformly at random.

    Output is grouped by organization and ordered by ``seq`` inside each.
    """
    if k < 1:
        raise ConfigError(f"organization count must be >= 1, got {k}")
    users = sorted({user for user, _, _ in entries})
    rng = np.random.default_rng(seed)
    draw = rng.integers(0, k, size=len(users))
    org_of = {user: int(o) for user, o in zip(users, draw)}

    per_org: list[list[tuple[int, int, int]]] = [[] for _ in range(k)]
    for idx, (user, release, processing) in enumerate(entries):
        per_org[org_of[user]].append((release, idx, processing))
    jobs = []
    for org, items in enumerate(per_org):
        items.sort()
        jobs.extend(Job(org, seq, release, p) for seq, (release, _, p) in enumerate(items))
    return jobs


def _largest_remainder(amount: int, weights: Sequence[float]) -> list[int]:
    total_w = sum(weights)
    quotas = [amount * w / total_w for w in weights]
    counts = [math.floor(q) for q in quotas]
    left = amount - sum(counts)
    order = sorted(range(len(weights)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:left]:
        counts[i] += 1
    return counts


def distribute_machines(total: int, k: int, kind: str = "uniform", theta: float = 1.0) -> MachineAllocation:
    """Split ``total`` machines among ``k`` organizations.

    ``kind`` is ``"uniform"`` (even split, remainder to the lowest ids) or
    ``"zipf"`` (organization ``i`` weighted by ``(i+1)**-theta``, largest
    remainder rounding, every organization keeps at least one machine).
    """
    if k < 1:
        raise ConfigError(f"organization count must be >= 1, got {k}")
    if total < k:
        raise ConfigError(f"{total} machines cannot cover {k} organizations")
    if kind == "uniform":
        base, extra = divmod(total, k)
        return MachineAllocation([base + (1 if i < extra else 0) for i in range(k)])
    if kind != "zipf":
        raise ConfigError(f"unknown machine distribution {kind!r}")
    if theta <= 0:
        raise ConfigError("zipf exponent must be positive")
    counts = _largest_remainder(total, [(i + 1) ** -theta for i in range(k)])
    for i in range(k):
        if counts[i] == 0:
            donor = max(range(k), key=lambda j: (counts[j], -j))
            counts[donor] -= 1
            counts[i] = 1
    return MachineAllocation(counts)


def parse_machine_dist(text: str) -> tuple[str, float]:
    """``"uniform"`` or ``"zipf"`` / ``"zipf:THETA"``."""
    if text == "uniform":
        return "uniform", 1.0
    if text == "zipf":
        return "zipf", 1.0
    if text.startswith("zipf:"):
        try:
            return "zipf", float(text[5:])
        except ValueError:
            raise ConfigError(f"bad zipf exponent in {text!r}") from None
    raise ConfigError(f"unknown machine distribution {text!r}")


@dataclass(frozen=True)
class OrgTemplate:
    """Job generator for one organization.

    Release and processing times are drawn uniformly from the inclusive
    integer ranges; ``jobs`` overrides the draw with explicit
    ``(release, processing)`` pairs.
    """

    count: int = 0
    release: tuple[int, int] = (0, 0)
    processing: tuple[int, int] = (1, 1)
    jobs: tuple[tuple[int, int], ...] | None = None


def synth_workload(templates: Sequence[OrgTemplate], seed=None) -> list[Job]:
    rng = np.random.default_rng(seed)
    out = []
    for org, tpl in enumerate(templates):
        if tpl.jobs is not None:
            pairs = list(tpl.jobs)
        else:
            (r0, r1), (p0, p1) = tpl.release, tpl.processing
            if tpl.count < 0 or r0 < 0 or r1 < r0 or p1 < p0:
                raise ConfigError(f"bad template for organization {org}: {tpl}")
            releases = rng.integers(r0, r1 + 1, size=tpl.count)
            procs = rng.integers(p0, p1 + 1, size=tpl.count)
            pairs = list(zip(releases.tolist(), procs.tolist()))
        if any(p < 1 for _, p in pairs):
            raise ConfigError(f"template for organization {org} yields processing < 1")
        pairs.sort(key=lambda rp: rp[0])
        out.extend(Job(org, seq, r, p) for seq, (r, p) in enumerate(pairs))
    return out


def _parse_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition("-")
    return int(lo), int(hi or lo)


def parse_synthetic_spec(text: str, k: int | None = None) -> list[OrgTemplate]:
    """Parse ``COUNT:R0-R1:P0-P1`` groups separated by ``;``.

    A single group is replicated for all ``k`` organizations.
    """
    templates = []
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        parts = chunk.split(":")
        if len(parts) != 3:
            raise ConfigError(f"synthetic group {chunk!r} is not COUNT:R0-R1:P0-P1")
        try:
            templates.append(OrgTemplate(int(parts[0]), _parse_range(parts[1]), _parse_range(parts[2])))
        except ValueError:
            raise ConfigError(f"non-integer value in synthetic group {chunk!r}") from None
    if not templates:
        raise ConfigError("empty synthetic workload spec")
    if k is not None:
        if len(templates) == 1:
            templates = templates * k
        elif len(templates) != k:
            raise ConfigError(f"synthetic spec has {len(templates)} groups for {k} organizations")
    return templates


def jobs_by_org(jobs: Iterable[Job], k: int) -> list[list[Job]]:
    grouped: list[list[Job]] = [[] for _ in range(k)]
    for job in jobs:
        if not 0 <= job.org < k:
            raise ConfigError(f"job {job} belongs to unknown organization")
        grouped[job.org].append(job)
    for lst in grouped:
        lst.sort(key=lambda j: j.seq)
        for prev, nxt in zip(lst, lst[1:]):
            if nxt.release < prev.release or nxt.seq == prev.seq:
                raise ConfigError(f"organization {prev.org}: jobs not in FIFO order at seq {nxt.seq}")
    return grouped
