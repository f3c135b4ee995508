"""Experiment runner: build an instance, run a policy next to the exact
fair reference, and write CSV summaries and traces."""

from __future__ import annotations

import csv
import io
import statistics
import time
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError
from .metrics import FairnessReport, fairness_report
from .schedulers import PolicyRun, direct_contr_run, exact_fair_run, rand_run, round_robin_run
from .workload import (
    Job,
    MachineAllocation,
    assign_orgs,
    distribute_machines,
    parse_machine_dist,
    parse_synthetic_spec,
    read_swf,
    scale_releases,
    sequentialize,
    synth_workload,
    time_window,
)

POLICY_NAMES = ("exact", "rand", "direct", "rr")

SUMMARY_COLUMNS = [
    "policy", "workload", "orgs", "machines", "machine_dist", "release_scale",
    "seed", "segment", "t_end", "n_samples", "jobs", "delta_psi", "p_tot",
    "per_job_unfairness", "relative_unfairness",
]

AGGREGATE_COLUMNS = [
    "policy", "cells", "mean_per_job_unfairness", "std_per_job_unfairness",
    "mean_relative_unfairness", "std_relative_unfairness",
]


@dataclass(frozen=True)
class ExperimentConfig:
    orgs: int
    machines: int
    t_end: int
    workload: str | None = None
    synthetic: str | None = None
    machine_dist: str = "uniform"
    release_scale: float = 1.0
    policy: str = "rr"
    rand_n: int | None = None
    epsilon: float = 0.1
    lam: float = 0.95
    seed: int = 0
    segment_start: int | None = None
    segment_length: int | None = None

    def validate(self) -> None:
        if (self.workload is None) == (self.synthetic is None):
            raise ConfigError("give exactly one of a workload file and a synthetic spec")
        if self.orgs < 1:
            raise ConfigError("need at least one organization")
        if self.machines < self.orgs:
            raise ConfigError(f"{self.machines} machines cannot cover {self.orgs} organizations")
        if self.t_end < 0:
            raise ConfigError("t_end must be >= 0")
        if self.policy not in POLICY_NAMES:
            raise ConfigError(f"unknown policy {self.policy!r}; choose from {', '.join(POLICY_NAMES)}")
        if self.release_scale <= 0:
            raise ConfigError("release scale must be positive")
        if (self.segment_start is None) != (self.segment_length is None):
            raise ConfigError("segment start and length go together")
        parse_machine_dist(self.machine_dist)


def _seeds(seed: int) -> tuple[int, int]:
    """Independent sub-seeds for the workload draw and the policy."""
    a, b = np.random.SeedSequence(seed).generate_state(2)
    return int(a), int(b)


def build_instance(config: ExperimentConfig) -> tuple[list[Job], MachineAllocation]:
    config.validate()
    kind, theta = parse_machine_dist(config.machine_dist)
    allocation = distribute_machines(config.machines, config.orgs, kind, theta)
    wl_seed, _ = _seeds(config.seed)
    if config.workload is not None:
        entries = sequentialize(read_swf(config.workload))
        entries = scale_releases(entries, config.release_scale)
        if config.segment_start is not None:
            entries = time_window(entries, config.segment_start, config.segment_length)
        jobs = assign_orgs(entries, config.orgs, wl_seed)
    else:
        templates = parse_synthetic_spec(config.synthetic, config.orgs)
        jobs = synth_workload(templates, wl_seed)
        if config.release_scale != 1.0:
            jobs = [replace(j, release=int(j.release * config.release_scale)) for j in jobs]
    jobs = [j for j in jobs if j.release <= config.t_end]
    return jobs, allocation


def run_policy(config: ExperimentConfig, jobs, allocation, *, trace: bool = False) -> PolicyRun:
    _, policy_seed = _seeds(config.seed)
    if config.policy == "exact":
        return exact_fair_run(jobs, allocation, config.t_end, trace=trace)
    if config.policy == "rand":
        return rand_run(jobs, allocation, config.t_end, epsilon=config.epsilon, lam=config.lam,
                        n_samples=config.rand_n, seed=policy_seed, trace=trace)
    if config.policy == "direct":
        return direct_contr_run(jobs, allocation, config.t_end, seed=policy_seed, trace=trace)
    return round_robin_run(jobs, allocation, config.t_end, trace=trace)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    run: PolicyRun
    reference: PolicyRun
    fairness: FairnessReport
    wall_time: float

    def row(self) -> dict:
        c = self.config
        f = self.fairness
        return {
            "policy": c.policy,
            "workload": c.workload if c.workload is not None else f"synthetic:{c.synthetic}",
            "orgs": c.orgs,
            "machines": c.machines,
            "machine_dist": c.machine_dist,
            "release_scale": c.release_scale,
            "seed": c.seed,
            "segment": "" if c.segment_start is None else c.segment_start,
            "t_end": c.t_end,
            "n_samples": "" if self.run.n_samples is None else self.run.n_samples,
            "jobs": len(self.run.jobs),
            "delta_psi": f.delta_psi,
            "p_tot": f.p_tot,
            "per_job_unfairness": f.per_job_unfairness,
            "relative_unfairness": f.relative_unfairness,
        }


def run_experiment(config: ExperimentConfig, *, trace: bool = False, reference: PolicyRun | None = None) -> ExperimentReport:
    """Run ``config.policy`` and the exact fair reference on the same instance."""
    jobs, allocation = build_instance(config)
    began = time.perf_counter()
    run = run_policy(config, jobs, allocation, trace=trace)
    elapsed = time.perf_counter() - began
    if reference is None:
        reference = run if config.policy == "exact" else exact_fair_run(jobs, allocation, config.t_end)
    return ExperimentReport(config, run, reference, fairness_report(run, reference), elapsed)


def run_sweep(config: ExperimentConfig, seeds: Sequence[int], policies: Sequence[str],
              segments: Sequence[int | None] = (None,)) -> tuple[list[dict], list[ExperimentReport]]:
    """Run every (seed, segment, policy) cell and aggregate per policy.

    The exact reference is computed once per (seed, segment) and shared by
    all policies. Aggregate rows follow the order of ``policies``.
    """
    if not seeds:
        raise ConfigError("need at least one seed")
    if not policies:
        raise ConfigError("need at least one policy")
    for p in policies:
        if p not in POLICY_NAMES:
            raise ConfigError(f"unknown policy {p!r}")
    reports: list[ExperimentReport] = []
    for seed in seeds:
        for seg in segments:
            base = replace(config, seed=seed, segment_start=seg,
                           segment_length=config.segment_length if seg is not None else None)
            jobs, allocation = build_instance(base)
            reference = exact_fair_run(jobs, allocation, base.t_end)
            for policy in dict.fromkeys(policies):
                reports.append(run_experiment(replace(base, policy=policy), reference=reference))
    reports.sort(key=lambda r: (r.config.seed, r.config.segment_start or 0, POLICY_NAMES.index(r.config.policy)))
    aggregate = []
    for policy in policies:
        cells = [r for r in reports if r.config.policy == policy]
        per_job = [r.fairness.per_job_unfairness for r in cells]
        rel = [r.fairness.relative_unfairness for r in cells]
        aggregate.append({
            "policy": policy,
            "cells": len(cells),
            "mean_per_job_unfairness": statistics.mean(per_job),
            "std_per_job_unfairness": statistics.pstdev(per_job),
            "mean_relative_unfairness": statistics.mean(rel),
            "std_relative_unfairness": statistics.pstdev(rel),
        })
    return aggregate, reports


# -- CSV --------------------------------------------------------------------

def render(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, (Fraction, float)):
        return f"{float(value):.6f}"
    return str(value)


def write_csv(stream, columns: Sequence[str], rows: Iterable[dict]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([render(row[c]) for c in columns])


def trace_columns(k: int, with_phi: bool) -> list[str]:
    cols = ["t"] + [f"psi_{u}" for u in range(k)]
    if with_phi:
        cols += [f"phi_{u}" for u in range(k)]
    return cols + ["started"]


def trace_rows(run: PolicyRun) -> tuple[list[str], list[dict]]:
    if run.trace is None:
        raise ConfigError("run was made without a trace")
    with_phi = run.contributions is not None
    cols = trace_columns(run.k, with_phi)
    rows = []
    for r in run.trace:
        row = {"t": r.t, "started": r.started}
        row.update({f"psi_{u}": x for u, x in enumerate(r.psi)})
        if with_phi:
            row.update({f"phi_{u}": x for u, x in enumerate(r.phi)})
        rows.append(row)
    return cols, rows


def to_csv_text(columns: Sequence[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    write_csv(buf, columns, rows)
    return buf.getvalue()
