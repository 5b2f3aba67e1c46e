"""Discrete-event simulator of multi-threaded callback executors.

Two executor schemes are modelled.

standard
    Threads share one cached ReadySet. A thread looking for work scans the
    ReadySet; only when it holds nothing eligible is it refreshed from the
    pending arrivals (a polling point). A refresh fetches at most one instance
    per regular callback. Timer callbacks bypass the cache and enter the
    ReadySet as soon as they are released. Selection order is timer before
    regular, then callback priority, then registration order.

priority_driven
    Every pick refreshes and takes the highest-priority eligible instance
    among everything pending.

Execution is non-preemptive in both schemes. A callback instance is eligible
once its chain predecessor has finished and no member of its
mutually-exclusive group is running on the executor.

A thread whose refresh came back empty stays blocked in it; the wake-up that
ends the wait is the same ReadySet update, not a new one.

Events at the same instant are handled as finishes, then releases, then
picks; idle threads pick in thread-index order.
"""

from __future__ import annotations

import heapq
import itertools
import random
import statistics
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, NamedTuple, Optional, Union

from .model import (PRIORITY_DRIVEN, SCHEMES, STANDARD, Callback, Chain, SystemSpec,
                    ThreadReservation)

SYNCHRONOUS = "synchronous"
RANDOMIZED = "randomized"

_FINISH, _RELEASE, _WAKE = 0, 1, 2


class TraceRecord(NamedTuple):
    time: int
    thread: str
    event: str
    callback: str
    instance: str


TRACE_FIELDS = TraceRecord._fields


@dataclass(frozen=True)
class SimConfig:
    horizon: int
    seed: int = 0
    release_offsets: str = SYNCHRONOUS
    # None keeps each executor's own scheme; a string applies to all executors
    scheme: Union[None, str, Mapping[str, str]] = None
    # "early": budget at the start of each period; "adversarial": the
    # reservation starts with its longest blackout, 2(T - C)
    supply_alignment: str = "early"
    # "wcet" or "uniform" (uniform integer in [1, wcet], seeded)
    execution_times: str = "wcet"
    trace: bool = False

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.release_offsets not in (SYNCHRONOUS, RANDOMIZED):
            raise ValueError(f"unknown release_offsets {self.release_offsets!r}")
        if self.execution_times not in ("wcet", "uniform"):
            raise ValueError(f"unknown execution_times {self.execution_times!r}")
        if self.supply_alignment not in ("early", "adversarial"):
            raise ValueError(f"unknown supply_alignment {self.supply_alignment!r}")


@dataclass
class ChainStats:
    chain_id: str
    completed: int = 0
    max_response: Optional[int] = None
    mean_response: Optional[float] = None
    p99_response: Optional[float] = None
    deadline_misses: int = 0
    max_pending_age: int = 0
    responses: List[int] = field(default_factory=list, repr=False)

    @property
    def worst_observed(self) -> int:
        """Largest response or age of an unfinished instance at the horizon."""
        return max(self.max_response or 0, self.max_pending_age)

    def as_dict(self) -> dict:
        return {
            "chain": self.chain_id,
            "completed": self.completed,
            "max": self.max_response,
            "mean": self.mean_response,
            "p99": self.p99_response,
            "deadline_misses": self.deadline_misses,
            "max_pending_age": self.max_pending_age,
        }


@dataclass
class ExecutorStats:
    executor_id: str
    scheme: str
    readyset_updates: int = 0
    processing_windows: int = 0

    def as_dict(self) -> dict:
        return {"executor": self.executor_id, "scheme": self.scheme,
                "readyset_updates": self.readyset_updates,
                "processing_windows": self.processing_windows}


@dataclass
class SimResult:
    horizon: int
    chains: Dict[str, ChainStats]
    executors: Dict[str, ExecutorStats]
    trace: Optional[List[TraceRecord]] = None

    @property
    def completions(self) -> int:
        return sum(c.completed for c in self.chains.values())

    def as_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "completions": self.completions,
            "chains": [c.as_dict() for c in self.chains.values()],
            "executors": [e.as_dict() for e in self.executors.values()],
        }


class _ChainInstance:
    __slots__ = ("chain", "number", "release", "name")

    def __init__(self, chain: Chain, number: int, release: int):
        self.chain = chain
        self.number = number
        self.release = release
        self.name = f"{chain.id}:{number}"


class _Job:
    __slots__ = ("cb", "inst", "seq", "exec_time", "exclusive")

    def __init__(self, cb: Callback, inst: _ChainInstance, seq: int, exec_time: int,
                 exclusive: Optional[str]):
        self.cb = cb
        self.inst = inst
        self.seq = seq
        self.exec_time = exec_time
        self.exclusive = exclusive


class _Thread:
    __slots__ = ("name", "res", "start_offset", "job", "must_poll", "wake_at", "waiting")

    def __init__(self, name: str, res: ThreadReservation, adversarial: bool):
        self.name = name
        self.res = res
        self.start_offset = 2 * (res.period - res.budget) if adversarial else 0
        self.job: Optional[_Job] = None
        self.must_poll = True
        self.wake_at: Optional[int] = None
        # blocked in a refresh that found nothing; waking from it is not a new update
        self.waiting = False

    @property
    def dedicated(self) -> bool:
        return self.res.budget == self.res.period

    def next_supply(self, t: int) -> int:
        if self.dedicated:
            return t
        b, C, T = self.start_offset, self.res.budget, self.res.period
        if t < b:
            return b
        phase = (t - b) % T
        return t if phase < C else t + (T - phase)

    def completion(self, t: int, work: int) -> int:
        if self.dedicated:
            return t + work
        b, C, T = self.start_offset, self.res.budget, self.res.period
        while True:
            t = self.next_supply(t)
            take = min(work, C - (t - b) % T)
            t += take
            work -= take
            if work == 0:
                return t


class _Executor:
    def __init__(self, ex, scheme: str, adversarial: bool, order: Dict[str, int]):
        self.id = ex.id
        self.scheme = scheme
        self.threads = [_Thread(f"{ex.id}/{k}", r, adversarial)
                        for k, r in enumerate(ex.threads)]
        self.pending: List[_Job] = []
        self.readyset: List[_Job] = []
        self.cached: set = set()
        self.running_groups: Dict[str, int] = defaultdict(int)
        self.order = order
        self.updates = 0
        self.windows = 0
        self.last_poll: Optional[int] = None

    def eligible(self, job: _Job) -> bool:
        return job.exclusive is None or self.running_groups[job.exclusive] == 0

    def best(self, jobs: List[_Job]) -> Optional[_Job]:
        best = None
        best_key = None
        for job in jobs:
            if not self.eligible(job):
                continue
            if self.scheme == STANDARD:
                key = (0 if job.cb.is_timer else 1, -job.cb.priority, self.order[job.cb.id], job.seq)
            else:
                key = (-job.cb.priority, job.seq)
            if best_key is None or key < best_key:
                best, best_key = job, key
        return best


def _resolve_scheme(cfg: SimConfig, ex) -> str:
    if cfg.scheme is None:
        scheme = ex.scheme
    elif isinstance(cfg.scheme, str):
        scheme = cfg.scheme
    else:
        scheme = cfg.scheme.get(ex.id, ex.scheme)
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    return scheme


def _p99(values: List[int]) -> float:
    if len(values) == 1:
        return float(values[0])
    return statistics.quantiles(values, n=100, method="inclusive")[98]


def simulate(system: SystemSpec, cfg: SimConfig) -> SimResult:
    """Run all executors of ``system`` on one discrete clock up to ``cfg.horizon``."""
    rng = random.Random(cfg.seed)
    order = {cb_id: k for k, cb_id in enumerate(system.callbacks)}
    execs = {ex.id: _Executor(ex, _resolve_scheme(cfg, ex), cfg.supply_alignment == "adversarial",
                              order)
             for ex in system.executors}
    exclusive = {}
    for g in system.groups:
        if g.exclusive:
            for member in g.members:
                exclusive[member] = g.id
    home = {cb_id: system.executor_of(cb_id) for cb_id in system.callbacks}
    hop = {}
    for ch in system.chains:
        delays = system.delays(ch.id)
        k = 0
        for a, b in zip(ch.callbacks, ch.callbacks[1:]):
            if home[a.id] != home[b.id]:
                hop[b.id] = delays[k] if k < len(delays) else 0
                k += 1

    trace: Optional[List[TraceRecord]] = [] if cfg.trace else None
    stats = {ch.id: ChainStats(ch.id) for ch in system.chains}
    open_instances: Dict[str, _ChainInstance] = {}
    heap: list = []
    tick = itertools.count()
    job_seq = itertools.count()
    horizon = cfg.horizon

    def push(t: int, phase: int, payload) -> None:
        heapq.heappush(heap, (t, phase, next(tick), payload))

    def log(t, thread, event, cb="-", inst="-"):
        if trace is not None:
            trace.append(TraceRecord(t, thread, event, cb, inst))

    def make_ready(cb: Callback, inst: _ChainInstance, t: int) -> None:
        ex = execs[home[cb.id]]
        if cfg.execution_times == "uniform":
            exec_time = rng.randint(1, cb.wcet)
        else:
            exec_time = cb.wcet
        job = _Job(cb, inst, next(job_seq), exec_time, exclusive.get(cb.id))
        log(t, "-", "release", cb.id, inst.name)
        if ex.scheme == STANDARD and cb.is_timer:
            ex.readyset.append(job)
        else:
            ex.pending.append(job)

    def poll(ex: _Executor, thread: _Thread, t: int) -> None:
        if not thread.waiting:
            ex.updates += 1
            log(t, thread.name, "readyset_update")
        if ex.last_poll != t:
            ex.windows += 1
            ex.last_poll = t
            log(t, thread.name, "pp")
        if ex.scheme == STANDARD:
            keep = []
            for job in ex.pending:
                if job.cb.id in ex.cached:
                    keep.append(job)
                else:
                    ex.readyset.append(job)
                    ex.cached.add(job.cb.id)
            ex.pending = keep

    def start(ex: _Executor, thread: _Thread, job: _Job, t: int) -> None:
        if ex.scheme == STANDARD:
            ex.readyset.remove(job)
            if not job.cb.is_timer:
                ex.cached.discard(job.cb.id)
        else:
            ex.pending.remove(job)
        thread.job = job
        if job.exclusive is not None:
            ex.running_groups[job.exclusive] += 1
        log(t, thread.name, "start", job.cb.id, job.inst.name)
        push(thread.completion(t, job.exec_time), _FINISH, (ex, thread))

    def choose(ex: _Executor, thread: _Thread, t: int) -> None:
        polled = False
        if ex.scheme == STANDARD:
            job = ex.best(ex.readyset)
            if job is None and (thread.must_poll or
                                any(j.cb.id not in ex.cached for j in ex.pending)):
                poll(ex, thread, t)
                polled = True
                job = ex.best(ex.readyset)
        else:
            job = None
            if thread.must_poll or any(ex.eligible(j) for j in ex.pending):
                poll(ex, thread, t)
                polled = True
                job = ex.best(ex.pending)
        thread.must_poll = False
        if job is not None:
            thread.waiting = False
            start(ex, thread, job, t)
        elif polled:
            thread.waiting = True

    def dispatch(ex: _Executor, t: int) -> None:
        for thread in ex.threads:
            if thread.job is not None:
                continue
            s = thread.next_supply(t)
            if s != t:
                if thread.wake_at != s and (thread.must_poll or ex.pending or ex.readyset):
                    thread.wake_at = s
                    push(s, _WAKE, None)
                continue
            choose(ex, thread, t)

    def finish(ex: _Executor, thread: _Thread, t: int) -> None:
        job = thread.job
        thread.job = None
        thread.must_poll = True
        if job.exclusive is not None:
            ex.running_groups[job.exclusive] -= 1
        log(t, thread.name, "finish", job.cb.id, job.inst.name)
        inst = job.inst
        chain = inst.chain
        if job.cb.index < len(chain.callbacks):
            nxt = chain.callbacks[job.cb.index]
            delay = hop.get(nxt.id, 0)
            if delay:
                push(t + delay, _RELEASE, ("arrive", nxt, inst))
            else:
                make_ready(nxt, inst, t)
        else:
            response = t - inst.release
            st = stats[chain.id]
            st.responses.append(response)
            if response > chain.deadline:
                st.deadline_misses += 1
            del open_instances[inst.name]

    for ch in system.chains:
        phase = rng.randrange(ch.period) if cfg.release_offsets == RANDOMIZED else 0
        if phase < horizon:
            push(phase, _RELEASE, ("chain", ch, 0))

    while heap and heap[0][0] <= horizon:
        t = heap[0][0]
        while heap and heap[0][0] == t:
            _, kind, _, payload = heapq.heappop(heap)
            if kind == _FINISH:
                finish(payload[0], payload[1], t)
            elif kind == _RELEASE:
                if payload[0] == "chain":
                    _, ch, k = payload
                    inst = _ChainInstance(ch, k, t)
                    open_instances[inst.name] = inst
                    if t + ch.period < horizon:
                        push(t + ch.period, _RELEASE, ("chain", ch, k + 1))
                    make_ready(ch.callbacks[0], inst, t)
                else:
                    _, cb, inst = payload
                    make_ready(cb, inst, t)
        for ex in execs.values():
            dispatch(ex, t)

    for inst in open_instances.values():
        st = stats[inst.chain.id]
        age = horizon - inst.release
        st.max_pending_age = max(st.max_pending_age, age)
        if age > inst.chain.deadline:
            st.deadline_misses += 1
    for st in stats.values():
        if st.responses:
            st.completed = len(st.responses)
            st.max_response = max(st.responses)
            st.mean_response = statistics.fmean(st.responses)
            st.p99_response = _p99(st.responses)

    ex_stats = {ex.id: ExecutorStats(ex.id, ex.scheme, ex.updates, ex.windows)
                for ex in execs.values()}
    return SimResult(horizon, stats, ex_stats, trace)


def default_horizon(system: SystemSpec, periods: int = 20, cap: int = 10**6) -> int:
    """Twenty periods of the slowest chain plus its deadline, capped."""
    tmax = max(ch.period for ch in system.chains)
    dmax = max(ch.deadline for ch in system.chains)
    return min(periods * tmax + dmax, cap)
