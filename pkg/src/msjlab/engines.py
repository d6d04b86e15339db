"""Event-driven engine internals: one fast path per policy family.

Order-preserving non-preemptive policies (FCFS, Modified-FCFS, infinite
server) reduce to a head-of-line start-time recursion over a single
departure heap.  SNF needs a full event loop with preemption; SNF-NP a
non-preemptive admission loop.  All paths emit the same raw material
(per-job waits / service intervals or an explicit in-service step log),
which ``collect_stats`` turns into time averages, batch integrals, the
queueing-probability indicator and the work-conservation audit.
"""

from __future__ import annotations

from bisect import bisect_left
from heapq import heappop, heappush

import numpy as np

from .policies import AuditResult
from .stream import JobStream, ResampleSource


def hol_start_times(arrivals, services, job_needs, n, admit_needs) -> np.ndarray:
    """Service start times under head-of-line admission in arrival order.

    Job k starts at the first instant, no earlier than its arrival and the
    previous job's start, at which the busy-server count is at most
    ``n - admit_needs[k]``.  FCFS passes the job's own need; Modified-FCFS
    passes the maximal need for every job.
    """
    num = len(arrivals)
    starts = np.empty(num)
    heap: list[tuple[float, int]] = []
    busy = 0
    t_prev = 0.0
    for k in range(num):
        t = arrivals[k]
        if t < t_prev:
            t = t_prev
        while heap and heap[0][0] <= t:
            busy -= heappop(heap)[1]
        lim = n - admit_needs[k]
        while busy > lim:
            d, l = heappop(heap)
            busy -= l
            if d > t:
                t = d
            while heap and heap[0][0] <= t:
                busy -= heappop(heap)[1]
        starts[k] = t
        busy += job_needs[k]
        heappush(heap, (t + services[k], int(job_needs[k])))
        t_prev = t
    return starts


def run_order_preserving(stream: JobStream, needs, mus, n_servers: int,
                         admit_threshold=None):
    """FCFS (admit_threshold None) or Modified-FCFS (constant threshold).

    Returns (waits, starts, departures); service is one contiguous interval.
    """
    types = stream.type_idx
    job_needs = needs[types]
    services = stream.unit_service / mus[types]
    admit = job_needs if admit_threshold is None else np.full(
        stream.horizon, admit_threshold, dtype=np.int64)
    starts = hol_start_times(stream.arrival_times, services, job_needs,
                             n_servers, admit)
    departures = starts + services
    waits = starts - stream.arrival_times
    return waits, starts, departures


def run_infinite_server(stream: JobStream, needs, mus):
    """Every job enters service on arrival; no capacity constraint."""
    services = stream.unit_service / mus[stream.type_idx]
    starts = stream.arrival_times.copy()
    waits = np.zeros(stream.horizon)
    return waits, starts, starts + services


def run_snf(stream: JobStream, needs, mus, n_servers: int):
    """Preemptive smallest-need-first event loop.

    The allocation is recomputed from the count vector at every arrival and
    departure; within a type the earliest-arrived jobs are in service.
    Preempted jobs re-queue and draw a fresh service clock on resume (role-3
    stream), which is distribution-preserving for exponential service.

    Returns (waits, departures, zlog) where zlog = (times, type, dz) records
    every change of the in-service count vector in chronological order.
    """
    num = stream.horizon
    num_types = len(needs)
    arrivals = stream.arrival_times
    unit_service = stream.unit_service
    type_of = stream.type_idx
    needs_l = [int(v) for v in needs]
    mus_l = [float(v) for v in mus]

    in_system: list[list[int]] = [[] for _ in range(num_types)]
    x = [0] * num_types
    z = [0] * num_types
    z_new = [0] * num_types
    enq_time = np.zeros(num)
    waits = np.zeros(num)
    departures = np.zeros(num)
    served_once = np.zeros(num, dtype=bool)
    clock_epoch = np.zeros(num, dtype=np.int64)
    heap: list[tuple[float, int, int]] = []
    resample = ResampleSource(stream.seed)

    zlog_t: list[float] = []
    zlog_i: list[int] = []
    zlog_dz: list[int] = []

    k_next = 0
    active = 0
    while k_next < num or active > 0:
        t_arr = arrivals[k_next] if k_next < num else np.inf
        while heap and clock_epoch[heap[0][1]] != heap[0][2]:
            heappop(heap)
        if heap and heap[0][0] <= t_arr:
            t, jid, _ = heappop(heap)
            i = type_of[jid]
            lst = in_system[i]
            lst.pop(bisect_left(lst, jid))
            x[i] -= 1
            z[i] -= 1
            departures[jid] = t
            active -= 1
            zlog_t.append(t)
            zlog_i.append(i)
            zlog_dz.append(-1)
        else:
            t = t_arr
            jid = k_next
            i = type_of[jid]
            in_system[i].append(jid)
            x[i] += 1
            enq_time[jid] = t
            k_next += 1
            active += 1
        rem = n_servers
        for j in range(num_types):
            cap = rem // needs_l[j]
            zj = x[j] if x[j] < cap else cap
            z_new[j] = zj
            rem -= needs_l[j] * zj
        for j in range(num_types):
            zc = z[j]
            zn = z_new[j]
            if zn == zc:
                continue
            lst = in_system[j]
            if zn > zc:
                for q in range(zc, zn):
                    j2 = lst[q]
                    waits[j2] += t - enq_time[j2]
                    if served_once[j2]:
                        dur = resample.next_exp() / mus_l[j]
                    else:
                        dur = unit_service[j2] / mus_l[j]
                        served_once[j2] = True
                    clock_epoch[j2] += 1
                    heappush(heap, (t + dur, j2, int(clock_epoch[j2])))
            else:
                for q in range(zn, zc):
                    j2 = lst[q]
                    enq_time[j2] = t
                    clock_epoch[j2] += 1
            z[j] = zn
            zlog_t.append(t)
            zlog_i.append(j)
            zlog_dz.append(zn - zc)
    zlog = (np.asarray(zlog_t), np.asarray(zlog_i, dtype=np.int64),
            np.asarray(zlog_dz, dtype=np.int64))
    return waits, departures, zlog


def run_snf_np(stream: JobStream, needs, mus, n_servers: int):
    """Non-preemptive smallest-need-first admission loop.

    On every arrival and departure, the waiting job with the smallest server
    need (earliest arrival on ties) is admitted while it fits.

    Returns (waits, starts, departures); service is contiguous.
    """
    num = stream.horizon
    num_types = len(needs)
    arrivals = stream.arrival_times
    type_of = stream.type_idx
    needs_l = [int(v) for v in needs]
    services = stream.unit_service / mus[type_of]

    from collections import deque
    queues = [deque() for _ in range(num_types)]
    order = sorted(range(num_types), key=lambda i: needs_l[i])
    idle = n_servers
    heap: list[tuple[float, int]] = []
    waits = np.zeros(num)
    starts = np.zeros(num)
    departures = np.zeros(num)

    def admit(t):
        nonlocal idle
        while True:
            best = None
            for i in order:
                if queues[i]:
                    head = queues[i][0]
                    need = needs_l[i]
                    if best is None or (need, head) < best[:2]:
                        best = (need, head, i)
            if best is None or best[0] > idle:
                return
            need, jid, i = best
            queues[i].popleft()
            waits[jid] = t - arrivals[jid]
            starts[jid] = t
            departures[jid] = t + services[jid]
            heappush(heap, (departures[jid], need))
            idle -= need

    k_next = 0
    active = 0
    while k_next < num or active > 0:
        t_arr = arrivals[k_next] if k_next < num else np.inf
        if heap and heap[0][0] <= t_arr:
            t, need = heappop(heap)
            idle += need
            active -= 1
        else:
            t = t_arr
            queues[type_of[k_next]].append(k_next)
            k_next += 1
            active += 1
        admit(t)
    return waits, starts, departures


def _segment_bin_integrals(seg_starts, seg_ends, values, bin_edges):
    """Integral of a piecewise-constant function over each bin.

    Segments are [seg_starts[j], seg_ends[j]) with value values[j]; bins are
    consecutive [bin_edges[b], bin_edges[b+1]) intervals.
    """
    nbins = len(bin_edges) - 1
    out = np.zeros(nbins)
    for b in range(nbins):
        a, bb = bin_edges[b], bin_edges[b + 1]
        overlap = np.minimum(seg_ends, bb) - np.maximum(seg_starts, a)
        np.clip(overlap, 0.0, None, out=overlap)
        out[b] = np.dot(values, overlap)
    return out


def _interval_bin_integrals(lo, hi, bin_edges):
    """Sum over intervals [lo_k, hi_k) of overlap length with each bin."""
    nbins = len(bin_edges) - 1
    out = np.zeros(nbins)
    for b in range(nbins):
        a, bb = bin_edges[b], bin_edges[b + 1]
        overlap = np.minimum(hi, bb) - np.maximum(lo, a)
        np.clip(overlap, 0.0, None, out=overlap)
        out[b] = overlap.sum()
    return out


def collect_stats(*, arrivals, departures, types, needs, mus, n_servers,
                  config_n, window, batches, delta_prime,
                  service_starts=None, zlog=None):
    """Time averages, per-batch integrals and the work-conservation audit.

    Exactly one of ``service_starts`` (contiguous service) or ``zlog``
    (explicit in-service step log) must be given.  All statistics are over
    the window [t0, t1]; batch bins split it evenly.
    """
    t0, t1 = window
    span = t1 - t0
    if span <= 0:
        raise ValueError("empty statistics window")
    num_types = len(needs)
    edges = np.linspace(t0, t1, batches + 1)
    bin_len = span / batches

    needs_f = np.asarray(needs, dtype=np.float64)
    batch_x = np.empty((batches, num_types))
    batch_z = np.empty((batches, num_types))
    for i in range(num_types):
        mask = types == i
        batch_x[:, i] = _interval_bin_integrals(arrivals[mask], departures[mask], edges)
        if zlog is None:
            batch_z[:, i] = _interval_bin_integrals(service_starts[mask],
                                                    departures[mask], edges)
    if zlog is not None:
        zt, zi, zdz = zlog
        for i in range(num_types):
            mask = zi == i
            ts, cum = zt[mask], np.cumsum(zdz[mask])
            if len(ts) == 0:
                batch_z[:, i] = 0.0
                continue
            seg_starts = ts
            seg_ends = np.append(ts[1:], max(t1, ts[-1]))
            batch_z[:, i] = _segment_bin_integrals(seg_starts, seg_ends,
                                                   cum.astype(np.float64), edges)
    batch_x /= bin_len
    batch_z /= bin_len
    batch_q = batch_x - batch_z

    # merged epoch sweep for total server need, busy servers, audit, P(queueing)
    x_times = np.concatenate([arrivals, departures])
    x_deltas = np.concatenate([needs_f[types], -needs_f[types]])
    if zlog is None:
        z_times = np.concatenate([service_starts, departures])
        z_deltas = x_deltas
    else:
        zt, zi, zdz = zlog
        z_times = zt
        z_deltas = needs_f[zi] * zdz
    all_times = np.concatenate([x_times, z_times])
    all_dx = np.concatenate([x_deltas, np.zeros(len(z_times))])
    all_dz = np.concatenate([np.zeros(len(x_times)), z_deltas])
    order = np.argsort(all_times, kind="stable")
    t_sorted = all_times[order]
    sx = np.cumsum(all_dx[order])
    sz = np.cumsum(all_dz[order])
    keep = np.empty(len(t_sorted), dtype=bool)
    keep[:-1] = t_sorted[1:] != t_sorted[:-1]
    keep[-1] = True
    t_ep = t_sorted[keep]
    sx = sx[keep]
    sz = sz[keep]

    qmask = sx >= config_n
    seg_starts = t_ep
    seg_ends = np.append(t_ep[1:], max(t1, t_ep[-1]))
    batch_qprob = _segment_bin_integrals(seg_starts, seg_ends,
                                         qmask.astype(np.float64), edges) / bin_len

    in_window = (t_ep >= t0) & (t_ep <= t1)
    slack = sz - np.minimum(sx, n_servers - delta_prime)
    slack_w = slack[in_window]
    if len(slack_w):
        audit = AuditResult(violations=int((slack_w < 0).sum()),
                            worst_slack=float(slack_w.min()))
    else:
        audit = AuditResult(violations=0, worst_slack=float("inf"))

    lam_mu = needs_f / np.asarray(mus, dtype=np.float64)
    batch_workload = batch_q @ lam_mu
    return {
        "batch_x": batch_x,
        "batch_z": batch_z,
        "batch_q": batch_q,
        "mean_x": batch_x.mean(axis=0),
        "mean_z": batch_z.mean(axis=0),
        "mean_q": batch_q.mean(axis=0),
        "batch_workload": batch_workload,
        "mean_workload": float(batch_workload.mean()),
        "batch_qprob": batch_qprob,
        "mean_qprob": float(batch_qprob.mean()),
        "audit": audit,
        "max_busy": float(sz.max()) if len(sz) else 0.0,
    }
