"""Fair scheduling of jobs across organizations that pool their machines.

Each organization's utility is measured by a strategy-proof throughput
metric and compared with its Shapley contribution to the pool.
"""

from .core import (
    Schedule,
    ScheduleEntry,
    SimState,
    ValidationReport,
    Violation,
    enumerate_subcoalitions,
    fifo_policy,
    simulate,
    validate_schedule,
)
from .errors import CapacityError, ConfigError, ContractViolation, DomainError, SWFParseError
from .metrics import FairnessReport, fairness_report, manhattan, p_tot
from .schedulers import (
    Decision,
    PolicyRun,
    TraceRow,
    direct_contr_run,
    distance,
    exact_fair_run,
    exact_fair_sp_select,
    rand_run,
    round_robin_run,
)
from .shapley import (
    PrefixSample,
    all_orderings,
    estimate_contributions,
    exact_shapley,
    sample_prefixes,
    sample_size,
    shapley_by_permutations,
)
from .utility import UtilityTracker, coalition_value, flow_time, org_utilities, psi_sp
from .workload import (
    Job,
    MachineAllocation,
    OrgTemplate,
    assign_orgs,
    distribute_machines,
    parse_swf,
    read_swf,
    sequentialize,
    synth_workload,
)

__version__ = "0.1.0"

__all__ = [
    "Schedule",
    "ScheduleEntry",
    "SimState",
    "ValidationReport",
    "Violation",
    "enumerate_subcoalitions",
    "fifo_policy",
    "simulate",
    "validate_schedule",
    "CapacityError",
    "ConfigError",
    "ContractViolation",
    "DomainError",
    "SWFParseError",
    "FairnessReport",
    "fairness_report",
    "manhattan",
    "p_tot",
    "Decision",
    "PolicyRun",
    "TraceRow",
    "direct_contr_run",
    "distance",
    "exact_fair_run",
    "exact_fair_sp_select",
    "rand_run",
    "round_robin_run",
    "PrefixSample",
    "all_orderings",
    "estimate_contributions",
    "exact_shapley",
    "sample_prefixes",
    "sample_size",
    "shapley_by_permutations",
    "UtilityTracker",
    "coalition_value",
    "flow_time",
    "org_utilities",
    "psi_sp",
    "Job",
    "MachineAllocation",
    "OrgTemplate",
    "assign_orgs",
    "distribute_machines",
    "parse_swf",
    "read_swf",
    "sequentialize",
    "synth_workload",
]
