"""Multiserver-job queueing laboratory.

Deterministic discrete-event simulation of multiserver-job systems under
pluggable scheduling policies, closed-form bound evaluation, exact
small-instance oracles, and coupled-sample-path verification, behind a CLI.
"""

from .model import (AssumptionReport, AssumptionThresholds, ConfigError,
                    CriticalIndices, DerivedParams, JobTypeSpec, ParamSet,
                    RegimeTemplate, SystemConfig, check_assumptions,
                    critical_indices, derive_params, make_param_set,
                    make_regime_config)
from .policies import (AuditResult, PolicyKind, QueueJob, QueueState,
                       Schedule, audit_work_conservation, schedule_fcfs,
                       schedule_modified_fcfs, schedule_snf, schedule_snf_np,
                       snf_allocation)
from .sim import (SimResult, check_infinite_server_dominance, check_sandwich,
                  simulate, simulate_coupled)
from .stream import JobStream, build_job_stream
from .stats import (BatchMeansEstimate, batch_means, from_batch_values,
                    mean_waiting_time, queueing_probability, workload)
from .bounds import (BoundReport, regime_order_trends, evaluate_bounds,
                     mminf_negative_part, mminf_tail, mminf_tail_linear)
from .oracle import (CtmcSpec, StationarySolution, ctmc_stationary,
                     ctmc_stationary_auto, erlang_c, mm1_whole_machine,
                     snf_allocation_fn)

__version__ = "0.1.0"
