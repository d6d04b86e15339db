"""Steady-state estimation: batch means with Student-t confidence intervals,
and the estimator assembly for waiting times and queueing probability."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .model import SystemConfig
from .sim import SimResult

CONFIDENCE = 0.95


@dataclass(frozen=True)
class BatchMeansEstimate:
    """Point estimate with a batch-means confidence interval.

    ``mean`` is the grand mean over all data; ``per_batch`` holds the means
    of the contiguous batches the data was split into, and the half-width is
    the Student-t CI computed from their sample variance.  With fewer than
    two batches the half-width is infinite (no variance information).
    """

    mean: float
    half_width: float
    batches: int
    per_batch: tuple[float, ...]

    def contains(self, value: float) -> bool:
        return abs(value - self.mean) <= self.half_width


def _t_half_width(per_batch: np.ndarray, confidence: float) -> float:
    b = len(per_batch)
    if b < 2:
        return float("inf")
    s = per_batch.std(ddof=1)
    q = sps.t.ppf(0.5 + confidence / 2, df=b - 1)
    return float(q * s / np.sqrt(b))


def batch_means(samples, batches: int = 20,
                confidence: float = CONFIDENCE) -> BatchMeansEstimate:
    """Estimate from an ordered sample sequence split into contiguous batches.

    Batch sizes differ by at most one when the count is not divisible.
    Raises if there are fewer samples than batches or fewer than 2 batches.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if batches < 2:
        raise ValueError(f"need at least 2 batches, got {batches}")
    if len(samples) < batches:
        raise ValueError(
            f"need at least {batches} samples for {batches} batches, got {len(samples)}")
    per_batch = np.array([chunk.mean() for chunk in np.array_split(samples, batches)])
    return BatchMeansEstimate(
        mean=float(samples.mean()),
        half_width=_t_half_width(per_batch, confidence),
        batches=batches,
        per_batch=tuple(float(v) for v in per_batch),
    )


def from_batch_values(per_batch, confidence: float = CONFIDENCE) -> BatchMeansEstimate:
    """Estimate from precomputed equal-span batch means (time averages)."""
    per_batch = np.asarray(per_batch, dtype=np.float64)
    return BatchMeansEstimate(
        mean=float(per_batch.mean()),
        half_width=_t_half_width(per_batch, confidence),
        batches=len(per_batch),
        per_batch=tuple(float(v) for v in per_batch),
    )


def _wait_estimate(waits: np.ndarray, batches: int) -> BatchMeansEstimate:
    # degrade gracefully on tiny samples: point estimate, no CI
    if len(waits) < max(batches, 2):
        return BatchMeansEstimate(
            mean=float(waits.mean()),
            half_width=float("inf"),
            batches=1,
            per_batch=(float(waits.mean()),),
        )
    return batch_means(waits, batches)


def mean_waiting_time(result: SimResult, config: SystemConfig,
                      batches: int | None = None) -> dict:
    """Overall and per-type mean waiting time estimates over post-warm-up jobs.

    Types with no post-warm-up arrivals are absent from ``per_type`` rather
    than reported as zero.  The overall mean is exactly the arrival-weighted
    average of the per-type means (same data, one grand mean).
    """
    if batches is None:
        batches = result.batches
    t0, _ = result.window
    mask = result.arrivals >= t0
    waits = result.waits[mask]
    types = result.types[mask]
    if len(waits) == 0:
        raise ValueError("no jobs arrive after the warm-up window")
    per_type = {}
    for i in range(len(config.types)):
        w_i = waits[types == i]
        if len(w_i):
            per_type[i] = _wait_estimate(w_i, batches)
    return {"overall": _wait_estimate(waits, batches), "per_type": per_type}


def queueing_probability(result: SimResult) -> BatchMeansEstimate:
    """Time-average of the saturation indicator with its batch-means CI.

    Equals the probability an arrival experiences queueing: Poisson arrivals
    see time averages.
    """
    return from_batch_values(result.batch_qprob)


def workload(result: SimResult) -> BatchMeansEstimate:
    """Time-averaged queued work (servers x expected remaining time)."""
    return from_batch_values(result.batch_workload)


def in_service_counts(result: SimResult) -> list[BatchMeansEstimate]:
    """Per-type time-averaged in-service counts with CIs."""
    return [from_batch_values(result.batch_z[:, i])
            for i in range(result.batch_z.shape[1])]


def queue_counts(result: SimResult) -> list[BatchMeansEstimate]:
    """Per-type time-averaged queue lengths with CIs."""
    return [from_batch_values(result.batch_q[:, i])
            for i in range(result.batch_q.shape[1])]
