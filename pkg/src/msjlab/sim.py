"""Seeded discrete-event simulation runs, coupled multi-system runs, and the
pathwise dominance checkers built on top of them."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import engines
from .model import SystemConfig, derive_params
from .policies import AuditResult, PolicyKind
from .stream import JobStream, build_job_stream  # re-export for convenience

__all__ = [
    "SimResult", "simulate", "simulate_coupled", "check_sandwich",
    "check_infinite_server_dominance", "build_job_stream", "JobStream",
]


@dataclass(eq=False)
class SimResult:
    """Everything a single run produces.

    Per-job arrays cover all jobs in the stream; the scalar statistics,
    batch integrals and the audit cover the post-warm-up window only.
    ``batch_*`` rows are time averages over equal spans of the window.
    """

    policy: PolicyKind
    n_servers: int
    seed: int
    num_jobs: int
    warmup_discarded: float
    window: tuple[float, float]
    batches: int
    waits: np.ndarray
    arrivals: np.ndarray
    departures: np.ndarray
    types: np.ndarray
    mean_x: np.ndarray
    mean_z: np.ndarray
    mean_q: np.ndarray
    batch_x: np.ndarray
    batch_z: np.ndarray
    batch_q: np.ndarray
    mean_workload: float
    batch_workload: np.ndarray
    mean_qprob: float
    batch_qprob: np.ndarray
    audit: AuditResult
    max_busy: float
    event_count: int

    def digest(self) -> str:
        """SHA-256 over all result content; equal digests mean bit-identical runs."""
        h = hashlib.sha256()
        h.update(repr((self.policy.value, self.n_servers, self.seed,
                       self.num_jobs, self.warmup_discarded, self.window,
                       self.batches, self.audit, self.max_busy,
                       self.event_count, self.mean_workload,
                       self.mean_qprob)).encode())
        for arr in (self.waits, self.arrivals, self.departures, self.types,
                    self.mean_x, self.mean_z, self.mean_q, self.batch_x,
                    self.batch_z, self.batch_q, self.batch_workload,
                    self.batch_qprob):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()


def simulate(
    policy: PolicyKind,
    config: SystemConfig,
    stream: JobStream,
    warmup: float = 0.1,
    *,
    n_servers: int | None = None,
    batches: int = 20,
    delta_prime: float | None = None,
    trajectory_path=None,
) -> SimResult:
    """Run one system on the given job stream.

    ``n_servers`` overrides the config's server count (used by the coupled
    bounding systems); the Modified-FCFS admission threshold and the audit
    default delta' stay the config's maximal need either way.
    """
    policy = PolicyKind(policy)
    params = derive_params(config)
    if not 0 <= warmup < 1:
        raise ValueError(f"warmup fraction must lie in [0, 1), got {warmup}")
    n_sys = config.n if n_servers is None else int(n_servers)
    needs = np.asarray(config.server_needs, dtype=np.int64)
    mus = np.asarray(config.service_rates, dtype=np.float64)
    if policy is not PolicyKind.INFINITE_SERVER and needs.max() > n_sys:
        raise ValueError(
            f"need {needs.max()} exceeds server count {n_sys}")
    if delta_prime is None:
        delta_prime = params.l_max

    zlog = None
    if policy is PolicyKind.FCFS:
        waits, starts, deps = engines.run_order_preserving(
            stream, needs, mus, n_sys, admit_threshold=None)
    elif policy is PolicyKind.MODIFIED_FCFS:
        waits, starts, deps = engines.run_order_preserving(
            stream, needs, mus, n_sys, admit_threshold=params.l_max)
    elif policy is PolicyKind.INFINITE_SERVER:
        waits, starts, deps = engines.run_infinite_server(stream, needs, mus)
    elif policy is PolicyKind.SNF:
        waits, deps, zlog = engines.run_snf(stream, needs, mus, n_sys)
        starts = None
    elif policy is PolicyKind.SNF_NP:
        waits, starts, deps = engines.run_snf_np(stream, needs, mus, n_sys)
    else:  # pragma: no cover
        raise ValueError(f"unknown policy {policy}")

    t1 = float(stream.arrival_times[-1])
    t0 = warmup * t1
    qp_n = n_sys if policy is not PolicyKind.INFINITE_SERVER else config.n
    stats = engines.collect_stats(
        arrivals=stream.arrival_times,
        departures=deps,
        types=stream.type_idx,
        needs=needs,
        mus=mus,
        n_servers=qp_n,
        config_n=qp_n,
        window=(t0, t1),
        batches=batches,
        delta_prime=delta_prime,
        service_starts=starts,
        zlog=zlog,
    )
    result = SimResult(
        policy=policy,
        n_servers=n_sys,
        seed=stream.seed,
        num_jobs=stream.horizon,
        warmup_discarded=warmup,
        window=(t0, t1),
        batches=batches,
        waits=waits,
        arrivals=stream.arrival_times,
        departures=deps,
        types=stream.type_idx,
        mean_x=stats["mean_x"],
        mean_z=stats["mean_z"],
        mean_q=stats["mean_q"],
        batch_x=stats["batch_x"],
        batch_z=stats["batch_z"],
        batch_q=stats["batch_q"],
        mean_workload=stats["mean_workload"],
        batch_workload=stats["batch_workload"],
        mean_qprob=stats["mean_qprob"],
        batch_qprob=stats["batch_qprob"],
        audit=stats["audit"],
        max_busy=stats["max_busy"],
        event_count=2 * stream.horizon,
    )
    if trajectory_path is not None:
        dump_trajectory(result, config, trajectory_path,
                        service_starts=starts, zlog=zlog)
    return result


def simulate_coupled(
    systems,
    config: SystemConfig,
    stream: JobStream,
    warmup: float = 0.1,
    *,
    batches: int = 20,
) -> list[SimResult]:
    """Run several systems on one shared job stream.

    ``systems`` is a list of (policy, server count) pairs; a server count of
    None means the config's own n.  Every system sees the identical arrival
    epochs, type labels and unit service draws.
    """
    return [
        simulate(policy, config, stream, warmup, n_servers=n_sys, batches=batches)
        for policy, n_sys in systems
    ]


def check_sandwich(results) -> bool:
    """Pathwise waiting-time sandwich: lower <= original <= upper, every job.

    Expects [lower, original, upper] from a coupled run of
    [Modified-FCFS @ n+l_max, FCFS @ n, Modified-FCFS @ n].  Comparison is
    exact; the coupling argument is pathwise, not statistical.
    """
    if len(results) != 3:
        raise ValueError("expected [lower, original, upper]")
    lower, original, upper = results
    if not (len(lower.waits) == len(original.waits) == len(upper.waits)):
        raise ValueError("coupled results have mismatched job counts")
    return bool(np.all(lower.waits <= original.waits)
                and np.all(original.waits <= upper.waits))


def _type_step(arrivals, departures, types, type_index):
    """Right-continuous job-count step function for one type."""
    mask = types == type_index
    times = np.concatenate([arrivals[mask], departures[mask]])
    deltas = np.concatenate([np.ones(mask.sum()), -np.ones(mask.sum())])
    order = np.argsort(times, kind="stable")
    t = times[order]
    cum = np.cumsum(deltas[order])
    return t, cum


def _step_at(t_sorted, cum, query):
    idx = np.searchsorted(t_sorted, query, side="right") - 1
    vals = np.where(idx >= 0, cum[np.maximum(idx, 0)], 0.0)
    return vals


def check_infinite_server_dominance(coupled) -> bool:
    """Pathwise per-type dominance of the infinite-server system.

    Expects [infinite-server result, finite-system result] from a coupled
    run; true iff the infinite-server job count is <= the finite system's,
    per type, at every event epoch of either system.
    """
    if len(coupled) != 2:
        raise ValueError("expected [infinite-server, finite] results")
    inf_res, fin_res = coupled
    if len(inf_res.waits) != len(fin_res.waits):
        raise ValueError("coupled results have mismatched job counts")
    num_types = len(inf_res.mean_x)
    for i in range(num_types):
        ti, ci = _type_step(inf_res.arrivals, inf_res.departures, inf_res.types, i)
        tf, cf = _type_step(fin_res.arrivals, fin_res.departures, fin_res.types, i)
        epochs = np.union1d(ti, tf)
        if np.any(_step_at(ti, ci, epochs) > _step_at(tf, cf, epochs)):
            return False
    return True


def dump_trajectory(result: SimResult, config: SystemConfig, path,
                    *, service_starts=None, zlog=None) -> None:
    """Write one line per event: t, kind, type, x-vector, z-vector (TSV).

    Vectors are semicolon-joined per-type counts after all events at time t;
    events at equal times are ordered departure first, then by job id.
    """
    num_types = config.num_types
    num = result.num_jobs
    ev_t = np.concatenate([result.arrivals, result.departures])
    ev_kind = np.concatenate([np.ones(num, dtype=np.int64),
                              np.zeros(num, dtype=np.int64)])  # 0=departure first
    ev_type = np.concatenate([result.types, result.types])
    ev_job = np.concatenate([np.arange(num), np.arange(num)])
    order = np.lexsort((ev_job, ev_kind, ev_t))

    x_steps = [_type_step(result.arrivals, result.departures, result.types, i)
               for i in range(num_types)]
    if zlog is None:
        z_steps = [_type_step(service_starts, result.departures, result.types, i)
                   for i in range(num_types)]
    else:
        zt, zi, zdz = zlog
        z_steps = []
        for i in range(num_types):
            mask = zi == i
            z_steps.append((zt[mask], np.cumsum(zdz[mask])))
    t_sorted = ev_t[order]
    x_at = np.stack([_step_at(t, c, t_sorted) for t, c in x_steps], axis=1)
    z_at = np.stack([_step_at(t, c, t_sorted) for t, c in z_steps], axis=1)
    kind_name = {0: "departure", 1: "arrival"}
    with open(path, "w") as fh:
        fh.write("t\tkind\ttype\tx\tz\n")
        for row, idx in enumerate(order):
            xs = ";".join(str(int(v)) for v in x_at[row])
            zs = ";".join(str(int(v)) for v in z_at[row])
            fh.write(f"{float(ev_t[idx])!r}\t{kind_name[int(ev_kind[idx])]}\t"
                     f"{int(ev_type[idx])}\t{xs}\t{zs}\n")
