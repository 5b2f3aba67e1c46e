"""Trace export and the semantic checks run over simulator traces."""

from __future__ import annotations

import bisect
import csv
import io
from collections import defaultdict
from typing import Dict, Iterable, List, Optional, TextIO

from .model import SystemSpec
from .sim import TRACE_FIELDS, TraceRecord


def write_trace(records: Iterable[TraceRecord], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRACE_FIELDS)
    for r in records:
        w.writerow(r)


def trace_text(records: Iterable[TraceRecord]) -> str:
    buf = io.StringIO()
    write_trace(records, buf)
    return buf.getvalue()


def read_trace(fh: TextIO) -> List[TraceRecord]:
    rows = csv.reader(fh)
    header = next(rows)
    if tuple(header) != TRACE_FIELDS:
        raise ValueError(f"unexpected trace header {header}")
    return [TraceRecord(int(t), th, ev, cb, inst) for t, th, ev, cb, inst in rows]


def _executor_of_thread(thread: str) -> str:
    return thread.rsplit("/", 1)[0]


def _intervals(trace: Iterable[TraceRecord]):
    """(callback, instance) -> (thread, start, finish); finish None if cut by the horizon."""
    out = {}
    for r in trace:
        if r.event == "start":
            out[(r.callback, r.instance)] = [r.thread, r.time, None]
        elif r.event == "finish":
            out[(r.callback, r.instance)][2] = r.time
    return out


def check_non_preemptive(trace: List[TraceRecord], system: SystemSpec,
                         exec_times: Optional[Dict[str, int]] = None) -> List[str]:
    """Each thread alternates start/finish of one instance.

    On dedicated threads the interval length must equal the execution time
    (WCET unless ``exec_times`` overrides it).
    """
    problems = []
    running: Dict[str, TraceRecord] = {}
    last_time: Dict[str, int] = {}
    dedicated = {f"{ex.id}/{k}": r.dedicated for ex in system.executors
                 for k, r in enumerate(ex.threads)}
    wcet = exec_times or {cb_id: cb.wcet for cb_id, cb in system.callbacks.items()}
    for r in trace:
        if r.thread == "-":
            continue
        if r.time < last_time.get(r.thread, 0):
            problems.append(f"{r.thread}: events out of order at {r.time}")
        last_time[r.thread] = r.time
        if r.event == "start":
            if r.thread in running:
                problems.append(f"{r.thread}: start of {r.callback} at {r.time} while running "
                                f"{running[r.thread].callback}")
            running[r.thread] = r
        elif r.event == "finish":
            s = running.pop(r.thread, None)
            if s is None or (s.callback, s.instance) != (r.callback, r.instance):
                problems.append(f"{r.thread}: unmatched finish of {r.callback} at {r.time}")
            elif dedicated.get(r.thread) and r.time - s.time != wcet[r.callback]:
                problems.append(f"{r.thread}: {r.callback} ran {r.time - s.time}, "
                                f"expected {wcet[r.callback]}")
    return problems


def check_mutual_exclusion(trace: List[TraceRecord], system: SystemSpec) -> List[str]:
    group_of = {}
    for g in system.groups:
        if g.exclusive:
            for cb in g.members:
                group_of[cb] = g.id
    problems = []
    active: Dict[str, int] = defaultdict(int)
    # finishes and starts at the same instant: close intervals first
    for r in sorted((r for r in trace if r.event in ("start", "finish")),
                    key=lambda r: (r.time, r.event != "finish")):
        g = group_of.get(r.callback)
        if g is None:
            continue
        active[g] += 1 if r.event == "start" else -1
        if active[g] > 1:
            problems.append(f"group {g}: {active[g]} members executing at {r.time}")
    return problems


def check_work_conservation(trace: List[TraceRecord], system: SystemSpec) -> List[str]:
    """No dedicated thread idles while an eligible released instance waits.

    The state after all events of an instant holds until the next instant,
    so it is inspected once per distinct event time.
    """
    group_of = {}
    for g in system.groups:
        if g.exclusive:
            for cb in g.members:
                group_of[cb] = g.id
    home = {cb: system.executor_of(cb) for cb in system.callbacks}
    m = {ex.id: ex.m for ex in system.executors if all(r.dedicated for r in ex.threads)}
    busy: Dict[str, int] = defaultdict(int)
    running_groups: Dict[str, int] = defaultdict(int)
    waiting: Dict[str, set] = defaultdict(set)
    problems = []

    def inspect(t):
        for ex_id, cap in m.items():
            if busy[ex_id] >= cap:
                continue
            for cb, inst in waiting[ex_id]:
                g = group_of.get(cb)
                if g is None or running_groups[g] == 0:
                    problems.append(f"{ex_id}: {busy[ex_id]}/{cap} threads busy at {t} "
                                    f"while {cb} ({inst}) is eligible")
                    return

    now = None
    for r in trace:
        if now is not None and r.time != now:
            inspect(now)
        now = r.time
        if r.event == "release":
            waiting[home[r.callback]].add((r.callback, r.instance))
        elif r.event == "start":
            ex_id = _executor_of_thread(r.thread)
            waiting[ex_id].discard((r.callback, r.instance))
            busy[ex_id] += 1
            if r.callback in group_of:
                running_groups[group_of[r.callback]] += 1
        elif r.event == "finish":
            busy[_executor_of_thread(r.thread)] -= 1
            if r.callback in group_of:
                running_groups[group_of[r.callback]] -= 1
    if now is not None:
        inspect(now)
    return problems


def window_instance_counts(trace: List[TraceRecord], system: SystemSpec,
                           horizon: int) -> Dict[str, int]:
    """Max number of instances of one regular callback executing in a processing window.

    Windows run from one polling point of an executor to the next; the last
    one ends at the horizon. Returns the maximum per executor.
    """
    pps: Dict[str, List[int]] = defaultdict(list)
    for r in trace:
        if r.event == "pp":
            pps[_executor_of_thread(r.thread)].append(r.time)
    home = {cb: system.executor_of(cb) for cb in system.callbacks}
    counts: Dict[tuple, int] = defaultdict(int)
    for (cb, _), (thread, start, finish) in _intervals(trace).items():
        if system.callbacks[cb].is_timer:
            continue
        ex = home[cb]
        points = pps[ex]
        end = horizon if finish is None else finish
        # windows [p_i, p_{i+1}) intersecting [start, end)
        first = max(0, bisect.bisect_right(points, start) - 1)
        last = bisect.bisect_left(points, end)
        for w in range(first, max(first + 1, last)):
            counts[(ex, w, cb)] += 1
    out: Dict[str, int] = {ex.id: 0 for ex in system.executors}
    for (ex, _, _), n in counts.items():
        out[ex] = max(out[ex], n)
    return out
