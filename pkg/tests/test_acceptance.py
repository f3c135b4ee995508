"""Acceptance criteria, one test each.

Every test records a one-line PASS/FAIL verdict; the lines are printed
together at the end of the pytest run (and immediately with ``-s``).
"""

import math
import statistics
import time
from fractions import Fraction
from itertools import combinations

import numpy as np

from fairsched.core import Schedule, ScheduleEntry, validate_schedule
from fairsched.metrics import fairness_report, manhattan
from fairsched.schedulers import direct_contr_run, exact_fair_run, rand_run, round_robin_run
from fairsched.shapley import exact_shapley, sample_size, shapley_by_permutations
from fairsched.utility import flow_time, psi_sp
from fairsched.workload import OrgTemplate, distribute_machines, synth_workload

from conftest import REF_PROCESSING, REF_STARTS, THREE_ORG_VALUES, random_instance

RESULTS: list[str] = []


def record(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    return ok


# 1 -------------------------------------------------------------------------

def test_c01_reference_schedule_values():
    pairs = list(zip(REF_STARTS, REF_PROCESSING))
    triples = [(0, s, p) for s, p in pairs]
    values = (psi_sp(pairs, 13), psi_sp(pairs, 14), flow_time(triples, 14))
    best = math.inf
    for _ in range(50):
        began = time.perf_counter()
        psi_sp(pairs, 13), psi_sp(pairs, 14), flow_time(triples, 14)
        best = min(best, time.perf_counter() - began)
    ok = values == (262, 297, 70) and best < 1e-3
    assert record(1, ok, f"psi(13), psi(14), flow(14) = {values}; expected (262, 297, 70); {best * 1e6:.1f} us")


# 2 -------------------------------------------------------------------------

def test_c02_shapley_formulas_agree():
    rng = np.random.default_rng(2)
    began = time.perf_counter()
    mismatches = inefficient = 0
    for i in range(200):
        k = 2 + i % 5
        players = list(range(k))
        v = {frozenset(c): int(rng.integers(-50, 100)) for r in range(1, k + 1) for c in combinations(players, r)}
        v[frozenset()] = 0
        phi = exact_shapley(v, players)
        mismatches += phi != shapley_by_permutations(v, players)
        inefficient += sum(phi.values()) != v[frozenset(players)]
    elapsed = time.perf_counter() - began
    ok = mismatches == 0 and inefficient == 0 and elapsed < 10
    assert record(2, ok, f"200 games k=2..6: {mismatches} mismatches, {inefficient} efficiency failures, {elapsed:.2f} s")


# 3 -------------------------------------------------------------------------

def test_c03_three_org_game():
    phi = exact_shapley(THREE_ORG_VALUES, "abc")
    got = (phi["a"], phi["b"], phi["c"])
    ok = got == (Fraction(19, 6), Fraction(19, 6), Fraction(2, 3))
    assert record(3, ok, f"phi = {tuple(str(x) for x in got)}; expected (19/6, 19/6, 2/3)")


# 4 -------------------------------------------------------------------------

CONTEXTS = [[], [(0, 3)], [(2, 5), (7, 1)], [(0, 12), (4, 4), (20, 9)]]


def test_c04_strategy_proofness():
    began = time.perf_counter()
    split = shift = count = 0
    R = range(13)
    P = range(1, 13)
    for t in range(31):
        for s in R:
            for p1 in P:
                for p2 in P:
                    if psi_sp([(s, p1)], t) + psi_sp([(s + p1, p2)], t) != psi_sp([(s, p1 + p2)], t):
                        split += 1
            if s > t - 1:
                continue
            for p in P:
                gains = {psi_sp(c + [(s, p)], t) - psi_sp(c + [(s + 1, p)], t) for c in CONTEXTS}
                # earlier is always strictly better, by the same amount in every context;
                # for jobs that finish by t the amount is also the same for every start time
                if len(gains) != 1 or min(gains) <= 0 or (s + 1 + p <= t and gains != {p}):
                    shift += 1
                added = {psi_sp(c + [(s, p)], t) - psi_sp(c, t) for c in CONTEXTS}
                if len(added) != 1 or min(added) <= 0:
                    count += 1
    elapsed = time.perf_counter() - began
    ok = split == shift == count == 0 and elapsed < 5
    assert record(4, ok, f"violations split/merge={split} shift={shift} job-count={count}; {elapsed:.2f} s")


# 5 -------------------------------------------------------------------------

def equal_length_instance(rng):
    p = int(rng.integers(1, 6))
    m = int(rng.integers(1, 4))
    n = int(rng.integers(1, 12))
    releases = sorted(rng.integers(0, 15, size=n).tolist())
    free = [0] * m
    triples = []
    for r in releases:
        i = min(range(m), key=lambda j: free[j])
        s = max(r, free[i])
        free[i] = s + p
        triples.append((r, s, p))
    t = max(s + p for _, s, p in triples) + int(rng.integers(0, 5))
    return p, t, triples


def test_c05_equal_length_flow_time_relation():
    rng = np.random.default_rng(5)
    bad = []
    bad_scaled = 0
    for _ in range(100):
        p, t, triples = equal_length_instance(rng)
        n = len(triples)
        lhs = psi_sp([(s, p) for _, s, p in triples], t)
        const = Fraction(n * (p * t * 2 + p * p + p), 2)
        releases = sum(r for r, _, _ in triples)
        ft = flow_time(triples, t)
        if lhs != const - releases - p * ft:
            bad.append((p, lhs, const - releases - p * ft))
        # same relation with the release sum weighted by p
        bad_scaled += lhs != const - p * releases - p * ft
    detail = f"{len(bad)}/100 instances violate the stated relation"
    if bad:
        p, lhs, rhs = bad[0]
        detail += (f" (first: p={p}, psi={lhs}, relation gives {rhs});"
                   f" with p * sum(r) instead of sum(r): {bad_scaled}/100 violations")
    assert record(5, not bad, detail)


# 6 -------------------------------------------------------------------------

def test_c06_unit_jobs_grand_value_invariant():
    rng = np.random.default_rng(6)
    differing = 0
    for i in range(100):
        k = int(rng.integers(1, 6))
        jobs, alloc = random_instance(rng, k, int(rng.integers(1, 201)), max_release=40, max_machines=4)
        t_end = 50
        runs = [
            round_robin_run(jobs, alloc, t_end),
            direct_contr_run(jobs, alloc, t_end, seed=i),
            rand_run(jobs, alloc, t_end, n_samples=15, seed=i),
            exact_fair_run(jobs, alloc, t_end),
        ]
        pairs = [[(e.start, 1) for e in r.schedule] for r in runs]
        for t in range(t_end + 1):
            if len({psi_sp(ps, t) for ps in pairs}) != 1:
                differing += 1
                break
    assert record(6, differing == 0, f"{differing}/100 unit instances with a policy-dependent grand value")


# 7 -------------------------------------------------------------------------

def test_c07_sampling_bound():
    k, eps, lam = 4, 0.25, 0.9
    n = sample_size(k, eps, lam)
    rng = np.random.default_rng(7)
    began = time.perf_counter()
    within = 0
    for seed in range(200):
        jobs, alloc = random_instance(rng, k, 80, max_release=30, max_machines=3)
        ref = exact_fair_run(jobs, alloc, 40)
        run = rand_run(jobs, alloc, 40, epsilon=eps, lam=lam, seed=seed)
        assert run.n_samples == n
        within += manhattan(run.utilities, ref.utilities) <= eps * sum(ref.utilities)
    elapsed = time.perf_counter() - began
    ok = within >= 180
    assert record(7, ok, f"N={n}; bound held in {within}/200 seeds (need >= 180); {elapsed:.1f} s")


# 8 -------------------------------------------------------------------------

def independent_distance(phi, psi, u, gain):
    n = len(phi)
    total = Fraction(0)
    for w in phi:
        gap = phi[w] + Fraction(gain, n) - psi[w] - (gain if w == u else 0)
        total += abs(gap)
    return total


def test_c08_local_optimality():
    rng = np.random.default_rng(8)
    decisions = suboptimal = inconsistent = 0
    for _ in range(60):
        k = int(rng.integers(1, 4))
        jobs, alloc = random_instance(rng, k, int(rng.integers(1, 21)), max_release=10, max_proc=4)

        def check(d):
            nonlocal decisions, suboptimal, inconsistent
            decisions += 1
            h = d.t + 1
            psi = {u: psi_sp(d.entries[u], h) for u in d.coalition}
            phi = exact_shapley(d.values, d.coalition)
            if phi != d.phi or psi != d.psi or d.values[d.coalition] != sum(psi.values()):
                inconsistent += 1
            dist = {
                u: independent_distance(phi, psi, u, psi_sp(d.entries[u] + [(d.t, d.heads[u])], h) - psi[u])
                for u in d.heads
            }
            if dist[d.chosen] != min(dist.values()):
                suboptimal += 1

        exact_fair_run(jobs, alloc, 30, on_decision=check)
    ok = decisions > 0 and suboptimal == 0 and inconsistent == 0
    assert record(8, ok, f"{decisions} decisions: {suboptimal} not distance-minimal, {inconsistent} inconsistent")


# 9 -------------------------------------------------------------------------

def heterogeneous_instance(seed):
    rng = np.random.default_rng(seed)
    templates = []
    for _ in range(5):
        count = int(rng.integers(10, 40))
        longest = int(rng.choice([2, 5, 10, 20]))
        last_release = int(rng.integers(20, 100))
        templates.append(OrgTemplate(count, (0, last_release), (1, longest)))
    return synth_workload(templates, seed), distribute_machines(10, 5, "zipf", 1.0)


def test_c09_relative_ordering():
    t_end = 150
    scores = {"rand": [], "direct": [], "rr": []}
    for seed in range(20):
        jobs, alloc = heterogeneous_instance(seed)
        ref = exact_fair_run(jobs, alloc, t_end)
        runs = {
            "rand": rand_run(jobs, alloc, t_end, n_samples=15, seed=seed),
            "direct": direct_contr_run(jobs, alloc, t_end, seed=seed),
            "rr": round_robin_run(jobs, alloc, t_end),
        }
        for name, run in runs.items():
            scores[name].append(float(fairness_report(run, ref).per_job_unfairness))
    mean = {p: statistics.mean(v) for p, v in scores.items()}
    std = {p: statistics.pstdev(v) for p, v in scores.items()}
    ok = mean["rand"] < mean["rr"] and mean["direct"] < mean["rr"]
    summary = ", ".join(f"{p} {mean[p]:.3f} +- {std[p]:.3f}" for p in scores)
    assert record(9, ok, f"mean +- stddev of unfairness per unit part: {summary}")


# 10 ------------------------------------------------------------------------

def inject(kind, entries, rng):
    """Return a copy of ``entries`` with one violation of ``kind``, or None."""
    entries = list(entries)
    idx = list(range(len(entries)))
    rng.shuffle(idx)
    if kind == "overlap" and len(entries) >= 2:
        a, b = entries[idx[0]], entries[idx[1]]
        entries[idx[1]] = ScheduleEntry(b.job, a.start, a.machine)
        return entries
    if kind == "fifo":
        for i in idx:
            for j in idx:
                a, b = entries[i], entries[j]
                if a.job.org == b.job.org and a.job.seq < b.job.seq and a.start < b.start:
                    entries[i] = ScheduleEntry(a.job, b.start, b.machine)
                    entries[j] = ScheduleEntry(b.job, a.start, a.machine)
                    return entries
        return None
    if kind == "greedy" and entries:
        del entries[idx[0]]
        return entries
    if kind == "early":
        for i in idx:
            e = entries[i]
            if e.job.release > 0:
                entries[i] = ScheduleEntry(e.job, e.job.release - 1, e.machine)
                return entries
    return None


def test_c10_validator_soundness():
    rng = np.random.default_rng(10)
    policies = [
        lambda j, a, t, s: round_robin_run(j, a, t),
        lambda j, a, t, s: direct_contr_run(j, a, t, seed=s),
        lambda j, a, t, s: rand_run(j, a, t, n_samples=15, seed=s),
        lambda j, a, t, s: exact_fair_run(j, a, t),
    ]
    kinds = ["overlap", "fifo", "greedy", "early"]
    rejected_valid = missed = injected = 0
    i = 0
    while injected < 1000:
        k = int(rng.integers(1, 4))
        jobs, alloc = random_instance(rng, k, int(rng.integers(2, 25)), max_release=12, max_proc=5)
        t_end = 40
        run = policies[i % 4](jobs, alloc, t_end, i)
        i += 1
        if not validate_schedule(run.schedule, jobs, alloc).ok:
            rejected_valid += 1
        kind = kinds[injected % 4]
        bad = inject(kind, run.schedule.entries, rng)
        if bad is None:
            continue
        injected += 1
        if kind not in validate_schedule(Schedule(bad, t_end), jobs, alloc).kinds():
            missed += 1
    ok = rejected_valid == 0 and missed == 0
    assert record(10, ok, f"{injected} injected violations, {missed} missed; "
                          f"{rejected_valid}/{i} policy schedules wrongly rejected")
