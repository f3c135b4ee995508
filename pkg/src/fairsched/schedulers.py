"""The four scheduling policies.

* ``exact_fair_run`` keeps a greedy schedule for every subcoalition and
  always serves the organization whose exact contribution most exceeds
  its utility.
* ``rand_run`` replaces the exact contributions by a Monte-Carlo estimate
  over sampled join orders; sampled coalitions only keep value counters.
* ``direct_contr_run`` credits contribution directly to machine owners.
* ``round_robin_run`` cycles through organizations.

Decision bookkeeping: a job started at ``t`` is worth nothing at ``t``
under the utility, so selections compare utilities and contributions one
step ahead, at ``t + 1``, where every started job is worth exactly one.
Reported values (traces, end-of-run vectors) use horizon ``t``.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .core import MAX_COALITION, Schedule, ScheduleEntry, SimState, masks_by_size, members_of
from .errors import CapacityError, ConfigError, ContractViolation
from .shapley import PrefixSample, marginal_sums, sample_prefixes, sample_size, shapley_numerators
from .utility import UtilityTracker, psi_sp
from .workload import Job, MachineAllocation, jobs_by_org

UtilityFn = Callable[[Sequence[tuple[int, int]], int], object]


@dataclass(frozen=True)
class TraceRow:
    t: int
    psi: tuple[int, ...]
    phi: tuple | None
    started: int


@dataclass
class PolicyRun:
    """Outcome of one policy on one instance.

    ``utilities``, ``contributions`` and ``coalition_values`` (keyed by
    coalition bitmask, only for policies that track subcoalitions) are
    evaluated at ``t_end``.
    Contributions are exact fractions for ``exact``, float estimates for
    ``rand``, integer machine credit for ``direct`` and absent for ``rr``.
    """

    policy: str
    jobs: tuple[Job, ...]
    allocation: MachineAllocation
    t_end: int
    schedule: Schedule
    utilities: list[int]
    contributions: list | None = None
    trace: list[TraceRow] | None = None
    n_samples: int | None = None
    coalition_values: dict[int, int] | None = None

    @property
    def k(self) -> int:
        return self.allocation.k


@dataclass(frozen=True)
class Decision:
    """What ExactFair knew when it picked ``chosen`` in ``coalition`` at ``t``.

    All values are taken at horizon ``t + 1`` and include the jobs the
    coalition already started at ``t``.
    """

    coalition: frozenset
    t: int
    phi: dict
    psi: dict
    values: dict
    entries: dict
    heads: dict
    chosen: int


# -- shared helpers ---------------------------------------------------------

def _check_inputs(jobs: Sequence[Job], allocation: MachineAllocation, t_end: int) -> tuple[Job, ...]:
    if t_end < 0:
        raise ConfigError("t_end must be >= 0")
    jobs = tuple(jobs)
    jobs_by_org(jobs, allocation.k)
    return jobs


def _replay(entries: Sequence[tuple[int, int, int]], nkeys: int, t_end: int):
    """Yield per-key utilities at every ``t`` in ``[0, t_end]``.

    ``entries`` are ``(start, processing, key)`` triples.
    """
    by_start: dict[int, list[tuple[int, int]]] = {}
    for s, p, key in entries:
        by_start.setdefault(s, []).append((key, p))
    tracker = UtilityTracker(nkeys)
    for t in range(t_end + 1):
        tracker.advance_to(t)
        yield tracker.values()
        for key, p in by_start.get(t, ()):
            tracker.on_start(key, p, t)


def _trace(schedule: Schedule, k: int, t_end: int, phi_rows) -> list[TraceRow]:
    started = [0] * (t_end + 1)
    for e in schedule.entries:
        started[e.start] += 1
    psi_rows = _replay([(e.start, e.job.processing, e.job.org) for e in schedule.entries], k, t_end)
    if phi_rows is None:
        phi_rows = (None for _ in range(t_end + 1))
    return [
        TraceRow(t, tuple(psi), None if phi is None else tuple(phi), started[t])
        for t, (psi, phi) in enumerate(zip(psi_rows, phi_rows))
    ]


def _utilities(schedule: Schedule, k: int, t: int) -> list[int]:
    return [psi_sp(pairs, t) for pairs in schedule.by_org(k)]


def _argmax(scores: dict[int, object], eligible: Sequence[int]) -> int:
    # eligible is sorted, so max() keeps the lowest id on ties
    return max(eligible, key=lambda u: scores[u])


def _run_loop(state: SimState, t_end: int, step: Callable[[int], None], extra_event=None) -> None:
    """Drive ``step(t)`` at every time a release or completion can matter."""
    t: int | None = 0
    while t is not None and t <= t_end:
        state.advance(t)
        step(t)
        nxt = [x for x in (state.next_event(), extra_event() if extra_event else None) if x is not None]
        t = min(nxt) if nxt else None


# -- ExactFair --------------------------------------------------------------

def exact_fair_sp_select(deficits: dict[int, object], eligible: Sequence[int]) -> int:
    """Organization with the largest ``phi - psi`` among those with a
    waiting job; ties go to the lowest id."""
    eligible = sorted(eligible)
    if not eligible:
        raise ContractViolation("no organization has a waiting job")
    return _argmax(deficits, eligible)


def distance(phi: dict, psi: dict, candidate: int, gain) -> Fraction:
    """Sum of per-organization gaps between contribution and utility after
    ``candidate`` gains ``gain`` and the coalition value grows by the same
    amount."""
    n = len(phi)
    share = Fraction(gain) / n
    total = abs(phi[candidate] + share - psi[candidate] - gain)
    for u in phi:
        if u != candidate:
            total += abs(phi[u] + share - psi[u])
    return total


class _Coalition:
    def __init__(self, mask: int, grouped: list[list[Job]], allocation: MachineAllocation):
        self.mask = mask
        self.members = members_of(mask)
        self.state = SimState((), allocation, self.members, grouped=grouped)
        self.tracker = UtilityTracker(allocation.k)
        self.pairs: dict[int, list[tuple[int, int]]] = {u: [] for u in self.members}

    def value(self, h: int) -> int:
        vals = self.tracker.values(h)
        return sum(vals[u] for u in self.members)

    def start(self, org: int, machine: int, t: int) -> ScheduleEntry:
        entry = self.state.start(org, machine)
        self.tracker.on_start(org, entry.job.processing, t)
        self.pairs[org].append((t, entry.job.processing))
        return entry


def exact_fair_run(
    jobs: Sequence[Job],
    allocation: MachineAllocation,
    t_end: int,
    *,
    utility: UtilityFn | None = None,
    selection: str = "deficit",
    trace: bool = False,
    on_decision: Callable[[Decision], None] | None = None,
) -> PolicyRun:
    """Exact fair scheduling over every subcoalition.

    ``selection="deficit"`` serves the largest ``phi - psi`` (the closed
    form for the built-in utility). ``selection="distance"`` evaluates the
    distance criterion for each candidate with ``utility`` (any callable
    ``(pairs, t) -> value``; defaults to the built-in one), breaking ties by
    larger deficit and then lower id.
    """
    jobs = _check_inputs(jobs, allocation, t_end)
    k = allocation.k
    if k > MAX_COALITION:
        raise CapacityError(f"{k} organizations exceed the cap of {MAX_COALITION}")
    if selection not in ("deficit", "distance"):
        raise ConfigError(f"unknown selection rule {selection!r}")
    if utility is not None and selection != "distance":
        raise ConfigError("a custom utility needs selection='distance'")
    utility = utility or psi_sp

    grouped = jobs_by_org(jobs, k)
    order = masks_by_size(k)
    coals = {m: _Coalition(m, grouped, allocation) for m in order}
    grand = coals[(1 << k) - 1]
    vcache: dict[int, object] = {}

    def sub_value(mask: int, h: int):
        if mask == 0:
            return 0
        if mask not in vcache:
            c = coals[mask]
            if selection == "deficit":
                vcache[mask] = c.value(h)
            else:
                vcache[mask] = sum(utility(c.pairs[u], h) for u in c.members)
        return vcache[mask]

    def local_table(c: _Coalition, h: int, own_value) -> list:
        n = len(c.members)
        table = [0] * (1 << n)
        for lm in range(1, (1 << n) - 1):
            gm = 0
            for i in members_of(lm):
                gm |= 1 << c.members[i]
            table[lm] = sub_value(gm, h)
        table[(1 << n) - 1] = own_value
        return table

    def values_dict(c: _Coalition, table: list) -> dict:
        return {frozenset(c.members[i] for i in members_of(lm)): table[lm] for lm in range(1 << len(c.members))}

    def decide_deficit(c: _Coalition, t: int, free: list[int]) -> None:
        h = t + 1
        n = len(c.members)
        fact = math.factorial(n)
        step = fact // n
        phi_num = psi = table = None
        while free and c.state.has_waiting():
            eligible = c.state.waiting_orgs()
            if len(eligible) == 1 and on_decision is None:
                org = eligible[0]
            else:
                if phi_num is None:
                    own = c.value(h)
                    table = local_table(c, h, own)
                    phi_num = dict(zip(c.members, shapley_numerators(table, n)))
                    psi = {u: c.tracker.value(u, h) for u in c.members}
                deficit = {u: phi_num[u] - fact * psi[u] for u in c.members}
                org = exact_fair_sp_select(deficit, eligible)
                if on_decision is not None:
                    on_decision(Decision(
                        coalition=frozenset(c.members), t=t,
                        phi={u: Fraction(phi_num[u], fact) for u in c.members},
                        psi=dict(psi),
                        values=values_dict(c, table),
                        entries={u: list(c.pairs[u]) for u in c.members},
                        heads={u: c.state.queues[u][0].processing for u in eligible},
                        chosen=org,
                    ))
            c.start(org, free.pop(0), t)
            if phi_num is not None:
                # one more unit at t+1 for the chosen org and for v(C)
                psi[org] += 1
                table[-1] += 1
                for u in c.members:
                    phi_num[u] += step

    def decide_distance(c: _Coalition, t: int, free: list[int]) -> None:
        h = t + 1
        n = len(c.members)
        while free and c.state.has_waiting():
            eligible = c.state.waiting_orgs()
            psi = {u: utility(c.pairs[u], h) for u in c.members}
            table = local_table(c, h, sum(psi.values()))
            nums = shapley_numerators(table, n)
            fact = math.factorial(n)
            phi = {u: Fraction(x) / fact for u, x in zip(c.members, nums)}
            heads = {u: c.state.queues[u][0].processing for u in eligible}
            best = None
            for u in eligible:
                gain = utility(c.pairs[u] + [(t, heads[u])], h) - psi[u]
                key = (distance(phi, psi, u, gain), -(phi[u] - psi[u]), u)
                if best is None or key < best:
                    best = key
            org = best[2]
            if on_decision is not None:
                on_decision(Decision(
                    coalition=frozenset(c.members), t=t, phi=phi, psi=psi,
                    values=values_dict(c, table),
                    entries={u: list(c.pairs[u]) for u in c.members},
                    heads=heads, chosen=org,
                ))
            c.start(org, free.pop(0), t)

    decide = decide_deficit if selection == "deficit" else decide_distance

    t: int | None = 0
    while t is not None and t <= t_end:
        vcache.clear()
        for mask in order:
            c = coals[mask]
            c.state.advance(t)
            c.tracker.advance_to(t)
            free = c.state.free_machines()
            if free and c.state.has_waiting():
                decide(c, t, free)
        events = [x for x in (coals[m].state.next_event() for m in order) if x is not None]
        t = min(events) if events else None

    schedule = Schedule(list(grand.state.entries), horizon=t_end)
    contributions = _exact_contributions(coals, k, [t_end])[0] if k else []
    rows = None
    if trace:
        rows = _trace(schedule, k, t_end, _exact_contributions(coals, k, range(t_end + 1)))
    values = {m: (c.value(t_end) if selection == "deficit" else sum(utility(c.pairs[u], t_end) for u in c.members))
              for m, c in coals.items()}
    return PolicyRun("exact", jobs, allocation, t_end, schedule,
                     _utilities(schedule, k, t_end), contributions, rows, coalition_values=values)


def _exact_contributions(coals: dict[int, _Coalition], k: int, horizons) -> list[list[Fraction]]:
    """Exact contributions in the grand coalition at each horizon."""
    horizons = list(horizons)
    size = 1 << k
    fact = math.factorial(k)
    per_mask: dict[int, list[int]] = {}
    t_max = max(horizons)
    for mask, c in coals.items():
        entries = [(s, p, 0) for u in c.members for s, p in c.pairs[u]]
        series = [vals[0] for vals in _replay(entries, 1, t_max)]
        per_mask[mask] = series
    out = []
    for h in horizons:
        table = [0] * size
        for mask in range(1, size):
            table[mask] = per_mask[mask][h]
        out.append([Fraction(x, fact) for x in shapley_numerators(table, k)])
    return out


# -- Rand -------------------------------------------------------------------

class _Counter:
    """Greedy value counter of one sampled coalition.

    Waiting jobs form a single queue in release order; each step starts
    as many of them as there are free machines.
    """

    def __init__(self, grouped: list[list[Job]], members: list[int], machines: int):
        pending = sorted((j for u in members for j in grouped[u]), key=lambda j: (j.release, j.org, j.seq))
        self.pending = deque(pending)
        self.waiting: deque[int] = deque()
        self.machines = machines
        self.busy: list[int] = []
        self.tracker = UtilityTracker(1)
        self.starts: list[tuple[int, int, int]] = []

    def step(self, t: int) -> None:
        self.tracker.advance_to(t)
        while self.busy and self.busy[0] <= t:
            heapq.heappop(self.busy)
        while self.pending and self.pending[0].release <= t:
            self.waiting.append(self.pending.popleft().processing)
        n = min(self.machines - len(self.busy), len(self.waiting))
        for _ in range(n):
            p = self.waiting.popleft()
            heapq.heappush(self.busy, t + p)
            self.tracker.on_start(0, p, t)
            self.starts.append((t, p, 0))

    def next_event(self, t: int) -> int | None:
        times = []
        if self.pending:
            times.append(self.pending[0].release)
        if self.busy:
            times.append(self.busy[0])
        later = [x for x in times if x > t]
        return min(later) if later else None

    def value(self, h: int) -> int:
        return self.tracker.value(0, h)


def rand_run(
    jobs: Sequence[Job],
    allocation: MachineAllocation,
    t_end: int,
    *,
    epsilon: float = 0.1,
    lam: float = 0.95,
    n_samples: int | None = None,
    seed=None,
    orderings=None,
    trace: bool = False,
) -> PolicyRun:
    """Fair scheduling with sampled contributions.

    The sample has ``sample_size(k, epsilon, lam)`` orderings unless
    ``n_samples`` overrides it; ``orderings`` supplies the sample
    explicitly (for instance every permutation, which makes the estimate
    exact).
    """
    jobs = _check_inputs(jobs, allocation, t_end)
    k = allocation.k
    if orderings is not None:
        sample = PrefixSample.from_orderings(orderings)
        if sample.k != k:
            raise ConfigError(f"orderings cover {sample.k} organizations, expected {k}")
    else:
        if n_samples is None:
            n_samples = sample_size(k, epsilon, lam)
        elif n_samples < 1:
            raise ConfigError("n_samples must be >= 1")
        sample = sample_prefixes(k, n_samples, seed)
    N = sample.n

    grouped = jobs_by_org(jobs, k)
    masks = sorted(sample.coalitions())
    counters = {
        m: _Counter(grouped, members_of(m), sum(allocation.counts[u] for u in members_of(m)))
        for m in masks
    }
    state = SimState((), allocation, grouped=grouped)
    tracker = UtilityTracker(k)
    clock = [0]

    def step(t: int) -> None:
        clock[0] = t
        tracker.advance_to(t)
        for c in counters.values():
            c.step(t)
        free = state.free_machines()
        if not (free and state.has_waiting()):
            return
        h = t + 1
        deficit = None
        while free and state.has_waiting():
            eligible = state.waiting_orgs()
            if len(eligible) == 1:
                org = eligible[0]
            else:
                if deficit is None:
                    vals = {m: c.value(h) for m, c in counters.items()}
                    marg = marginal_sums(sample, vals)
                    deficit = {u: marg[u] - N * tracker.value(u, h) for u in range(k)}
                org = exact_fair_sp_select(deficit, eligible)
            entry = state.start(org, free.pop(0))
            tracker.on_start(org, entry.job.processing, t)
            if deficit is not None:
                deficit[org] -= N

    def counter_event():
        evs = [x for x in (c.next_event(clock[0]) for c in counters.values()) if x is not None]
        return min(evs) if evs else None

    _run_loop(state, t_end, step, counter_event)
    schedule = Schedule(list(state.entries), horizon=t_end)

    def estimates(horizons):
        t_max = max(horizons)
        series = {m: [v[0] for v in _replay(c.starts, 1, t_max)] for m, c in counters.items()}
        for h in horizons:
            sums = marginal_sums(sample, {m: s[h] for m, s in series.items()})
            yield [float(Fraction(x, N)) for x in sums]

    contributions = next(estimates([t_end]))
    rows = _trace(schedule, k, t_end, estimates(range(t_end + 1))) if trace else None
    values = {m: c.value(t_end) for m, c in counters.items()}
    return PolicyRun("rand", jobs, allocation, t_end, schedule, _utilities(schedule, k, t_end),
                     contributions, rows, n_samples=N, coalition_values=values)


# -- DirectContr ------------------------------------------------------------

def direct_contr_run(
    jobs: Sequence[Job],
    allocation: MachineAllocation,
    t_end: int,
    *,
    seed=None,
    trace: bool = False,
) -> PolicyRun:
    """Fair scheduling with contribution credited to machine owners.

    Every executed unit part earns utility for the job owner and the same
    amount of contribution for the owner of the machine running it. At a
    decision step the free machines are visited in a fresh random order
    and each goes to the waiting organization with the largest deficit as
    of the start of the step.
    """
    jobs = _check_inputs(jobs, allocation, t_end)
    k = allocation.k
    owners = allocation.owners()
    rng = np.random.default_rng(seed)
    state = SimState((), allocation, grouped=jobs_by_org(jobs, k))
    psi = UtilityTracker(k)
    phi = UtilityTracker(k)
    credit: list[tuple[int, int, int]] = []

    def step(t: int) -> None:
        psi.advance_to(t)
        phi.advance_to(t)
        if not (state.free_machines() and state.has_waiting()):
            return
        gamma = rng.permutation(allocation.total).tolist()
        pv, fv = psi.values(), phi.values()
        deficit = {u: fv[u] - pv[u] for u in range(k)}
        for m in gamma:
            if not state.has_waiting():
                break
            if state.busy_until[m] > t:
                continue
            org = exact_fair_sp_select(deficit, state.waiting_orgs())
            entry = state.start(org, m)
            psi.on_start(org, entry.job.processing, t)
            phi.on_start(owners[m], entry.job.processing, t)
            credit.append((t, entry.job.processing, owners[m]))

    _run_loop(state, t_end, step)
    entries = sorted(state.entries, key=lambda e: (e.start, e.machine))
    schedule = Schedule(entries, horizon=t_end)
    contributions = [0] * k
    for s, p, u in credit:
        contributions[u] += psi_sp([(s, p)], t_end)
    rows = _trace(schedule, k, t_end, _replay(credit, k, t_end)) if trace else None
    return PolicyRun("direct", jobs, allocation, t_end, schedule,
                     _utilities(schedule, k, t_end), contributions, rows)


# -- RoundRobin -------------------------------------------------------------

def round_robin_run(
    jobs: Sequence[Job],
    allocation: MachineAllocation,
    t_end: int,
    *,
    trace: bool = False,
) -> PolicyRun:
    """Serve organizations in cyclic order, skipping empty queues."""
    jobs = _check_inputs(jobs, allocation, t_end)
    k = allocation.k
    state = SimState((), allocation, grouped=jobs_by_org(jobs, k))
    pointer = [0]

    def step(t: int) -> None:
        free = state.free_machines()
        while free and state.has_waiting():
            for i in range(k):
                u = (pointer[0] + i) % k
                if state.queues[u]:
                    break
            state.start(u, free.pop(0))
            pointer[0] = (u + 1) % k

    _run_loop(state, t_end, step)
    schedule = Schedule(list(state.entries), horizon=t_end)
    rows = _trace(schedule, k, t_end, None) if trace else None
    return PolicyRun("rr", jobs, allocation, t_end, schedule, _utilities(schedule, k, t_end), None, rows)


POLICIES = {
    "exact": exact_fair_run,
    "rand": rand_run,
    "direct": direct_contr_run,
    "rr": round_robin_run,
}
