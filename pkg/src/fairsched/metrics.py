"""Fairness of a policy run measured against the exact fair reference."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import Schedule
from .errors import ContractViolation


def manhattan(a: Sequence, b: Sequence):
    if len(a) != len(b):
        raise ContractViolation(f"vectors of length {len(a)} and {len(b)}")
    return sum(abs(x - y) for x, y in zip(a, b))


def p_tot(reference: Schedule | Iterable[tuple[int, int]], t_end: int) -> int:
    """Unit parts executed by ``t_end``; accepts a schedule or ``(start, processing)`` pairs."""
    if isinstance(reference, Schedule):
        pairs = ((e.start, e.job.processing) for e in reference.entries)
    else:
        pairs = reference
    return sum(max(0, min(p, t_end - s)) for s, p in pairs if s <= t_end)


@dataclass(frozen=True)
class FairnessReport:
    delta_psi: int
    p_tot: int
    per_job_unfairness: Fraction
    relative_unfairness: Fraction
    reference_value: int


def _ratio(num: int, den: int) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


def fairness_report(run, reference) -> FairnessReport:
    """Compare the end-of-run utility vectors of ``run`` and ``reference``.

    Both must be runs on the same jobs, allocation and horizon. A zero
    denominator yields a zero ratio (nothing executed means nothing unfair).
    """
    if run.t_end != reference.t_end:
        raise ContractViolation(f"horizons differ: {run.t_end} vs {reference.t_end}")
    if run.allocation != reference.allocation:
        raise ContractViolation("runs use different machine allocations")
    if sorted(run.jobs) != sorted(reference.jobs):
        raise ContractViolation("runs schedule different job sets")
    delta = manhattan(run.utilities, reference.utilities)
    total = p_tot(reference.schedule, reference.t_end)
    value = sum(reference.utilities)
    return FairnessReport(delta, total, _ratio(delta, total), _ratio(delta, value), value)
