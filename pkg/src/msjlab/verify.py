"""Named invariant suites run by the ``verify`` CLI subcommand.

Each suite is a fixed-seed, desk-scale version of a pathwise or statistical
property; the full-scale versions live in the acceptance test module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import stats
from .bounds import mminf_tail
from .model import (JobTypeSpec, ParamSet, SystemConfig, derive_params,
                    make_param_set)
from .oracle import ctmc_stationary_auto, erlang_c
from .policies import PolicyKind
from .sim import (build_job_stream, check_infinite_server_dominance,
                  check_sandwich, simulate, simulate_coupled)


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    passed: bool
    detail: str


def _outcome(name, passed, detail=""):
    return CheckOutcome(name=name, passed=bool(passed), detail=detail)


def suite_coupling(seeds=range(5), jobs=20_000) -> list[CheckOutcome]:
    """Pathwise sandwich and infinite-server dominance, exact comparisons."""
    config = make_param_set(ParamSet.ONE, 64)
    l_max = derive_params(config).l_max
    out = []
    for seed in seeds:
        stream = build_job_stream(seed, jobs, config)
        triple = simulate_coupled(
            [(PolicyKind.MODIFIED_FCFS, config.n + l_max),
             (PolicyKind.FCFS, None),
             (PolicyKind.MODIFIED_FCFS, None)], config, stream)
        out.append(_outcome(f"sandwich[seed={seed}]", check_sandwich(triple)))
        pair = simulate_coupled(
            [(PolicyKind.INFINITE_SERVER, None), (PolicyKind.FCFS, None)],
            config, stream)
        out.append(_outcome(f"dominance[seed={seed}]",
                            check_infinite_server_dominance(pair)))
    return out


def suite_oracle(seed=0, jobs=200_000) -> list[CheckOutcome]:
    """Simulation against the Erlang-C and truncated-CTMC references."""
    out = []
    mm2 = SystemConfig(n=2, types=(JobTypeSpec(1.0, 1.0, 1),))
    ref = erlang_c(2, 1.0, 1.0)["mean_wait"]
    r = simulate(PolicyKind.FCFS, mm2, build_job_stream(seed, jobs, mm2))
    est = stats.mean_waiting_time(r, mm2)["overall"]
    out.append(_outcome("erlang_c_mm2", est.contains(ref),
                        f"est {est.mean:.4f} +- {est.half_width:.4f}, ref {ref:.4f}"))

    two_type = SystemConfig(n=6, types=(JobTypeSpec(2.76, 1.0, 1),
                                        JobTypeSpec(0.05, 1.0, 3)))
    sol = ctmc_stationary_auto(two_type)
    out.append(_outcome("ctmc_contracts",
                        sol.residual_inf < 1e-10 and not sol.truncation_limited,
                        f"residual {sol.residual_inf:.2e}, tail {sol.tail_mass_bound:.2e}"))
    r2 = simulate(PolicyKind.SNF, two_type, build_job_stream(seed, jobs, two_type))
    for i in range(2):
        est = stats.from_batch_values(r2.batch_q[:, i])
        out.append(_outcome(
            f"ctmc_queue_type{i + 1}", est.contains(sol.mean_q[i]),
            f"est {est.mean:.5f} +- {est.half_width:.5f}, ctmc {sol.mean_q[i]:.5f}"))
    return out


def suite_drift(seed=0, jobs=200_000) -> list[CheckOutcome]:
    """Per-type in-service counts against the flow-balance identity."""
    config = make_param_set(ParamSet.ONE, 64)
    out = []
    stream = build_job_stream(seed, jobs, config)
    for policy in (PolicyKind.FCFS, PolicyKind.SNF, PolicyKind.SNF_NP,
                   PolicyKind.MODIFIED_FCFS):
        r = simulate(policy, config, stream)
        for i, t in enumerate(config.types):
            target = t.arrival_rate / t.service_rate
            est = stats.from_batch_values(r.batch_z[:, i])
            out.append(_outcome(
                f"in_service[{policy.value},type{i + 1}]", est.contains(target),
                f"est {est.mean:.3f} +- {est.half_width:.3f}, target {target:.3f}"))
    return out


def suite_tails(seed=0, jobs=200_000) -> list[CheckOutcome]:
    """One-sided left-tail bound for the infinite-server system, sampled at
    arrival epochs (Poisson arrivals see time averages)."""
    config = make_param_set(ParamSet.ONE, 64)
    p = derive_params(config)
    c = tuple(1.0 / t.service_rate for t in config.types)
    c_max = max(c)
    scale = math.sqrt(c_max**2 * p.mu_max * p.sigma2)
    stream = build_job_stream(seed, jobs, config)
    r = simulate(PolicyKind.INFINITE_SERVER, config, stream)
    phi = _phi_at_arrivals(r, config, c)
    out = []
    for mult in (0.5, 1.0, 1.5, 2.0):
        k_val = mult * scale
        bound = mminf_tail(config, c, k_val)
        freq = float((phi <= -k_val).mean())
        allowance = 3 * math.sqrt(bound * (1 - bound) / len(phi))
        out.append(_outcome(
            f"tail[K={mult}x]", freq <= bound + allowance,
            f"freq {freq:.4f} <= bound {bound:.4f} + {allowance:.4f}"))
    return out


def _phi_at_arrivals(result, config, c):
    """Centered weighted job count seen by each post-warm-up arrival.

    Sampled just before the arrival epoch, so the arriving job itself is
    excluded: that is the state Poisson arrivals observe.
    """
    t0, _ = result.window
    sample_times = result.arrivals[result.arrivals >= t0]
    needs = np.asarray(config.server_needs, dtype=np.float64)
    offered = np.array([t.arrival_rate / t.service_rate for t in config.types])
    c = np.asarray(c, dtype=np.float64)
    phi = np.full(len(sample_times), -float(c @ (needs * offered)))
    for i in range(config.num_types):
        mask = result.types == i
        times = np.concatenate([result.arrivals[mask], result.departures[mask]])
        deltas = np.concatenate([np.ones(mask.sum()), -np.ones(mask.sum())])
        order = np.argsort(times, kind="stable")
        cum = np.cumsum(deltas[order])
        idx = np.searchsorted(times[order], sample_times, side="left") - 1
        x_i = np.where(idx >= 0, cum[np.maximum(idx, 0)], 0.0)
        phi += c[i] * needs[i] * x_i
    return phi


SUITES = {
    "coupling": suite_coupling,
    "oracle": suite_oracle,
    "drift": suite_drift,
    "tails": suite_tails,
}


def run_suite(name: str) -> list[CheckOutcome]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name]()
