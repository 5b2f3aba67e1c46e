"""Domain types shared by analysis, simulation and generation.

All time quantities are non-negative integers in one abstract time unit.
Priorities follow the "larger value = higher priority" convention for both
chains and callbacks.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

TIMER = "timer"
REGULAR = "regular"
CALLBACK_KINDS = (TIMER, REGULAR)

STANDARD = "standard"
PRIORITY_DRIVEN = "priority_driven"
SCHEMES = (STANDARD, PRIORITY_DRIVEN)

REENTRANT = "reentrant"
MUTUALLY_EXCLUSIVE = "mutually_exclusive"
GROUP_KINDS = (REENTRANT, MUTUALLY_EXCLUSIVE)

CONSTRAINED = "constrained"
ARBITRARY = "arbitrary"


@dataclass(frozen=True)
class Callback:
    id: str
    wcet: int
    priority: int = 0
    kind: str = REGULAR
    group_id: Optional[str] = None
    chain_id: Optional[str] = None
    index: int = 1

    @property
    def is_timer(self) -> bool:
        return self.kind == TIMER


@dataclass(frozen=True)
class Chain:
    id: str
    callbacks: Tuple[Callback, ...]
    period: int
    deadline: int
    priority: int = 0
    trigger: str = TIMER

    def __len__(self) -> int:
        return len(self.callbacks)

    @cached_property
    def total_wcet(self) -> int:
        return sum(cb.wcet for cb in self.callbacks)

    @property
    def last_wcet(self) -> int:
        return self.callbacks[-1].wcet

    @cached_property
    def max_callback_wcet(self) -> int:
        return max(cb.wcet for cb in self.callbacks)

    @property
    def head(self) -> Callback:
        return self.callbacks[0]

    @property
    def deadline_class(self) -> str:
        return CONSTRAINED if self.deadline <= self.period else ARBITRARY

    @property
    def is_constrained(self) -> bool:
        return self.deadline <= self.period

    @property
    def utilization(self) -> float:
        return self.total_wcet / self.period


def make_chain(chain_id: str, wcets: Sequence[int], period: int,
               deadline: Optional[int] = None, priority: int = 0,
               trigger: str = TIMER, groups: Optional[Sequence[Optional[str]]] = None,
               priorities: Optional[Sequence[int]] = None) -> Chain:
    """Build a chain whose callbacks are named ``<chain_id>.<j>`` (1-based).

    The head is a timer callback for timer-triggered chains and a regular
    callback otherwise.
    """
    cbs = []
    for j, wcet in enumerate(wcets, start=1):
        kind = TIMER if (j == 1 and trigger == TIMER) else REGULAR
        cbs.append(Callback(
            id=f"{chain_id}.{j}", wcet=wcet,
            priority=priorities[j - 1] if priorities is not None else 0,
            kind=kind, group_id=groups[j - 1] if groups is not None else None,
            chain_id=chain_id, index=j))
    return Chain(chain_id, tuple(cbs), period,
                 period if deadline is None else deadline, priority, trigger)


@dataclass(frozen=True)
class ThreadReservation:
    budget: int
    period: int

    @property
    def dedicated(self) -> bool:
        return self.budget == self.period


@dataclass(frozen=True)
class ExecutorSpec:
    id: str
    threads: Tuple[ThreadReservation, ...]
    scheme: str = STANDARD

    @property
    def m(self) -> int:
        return len(self.threads)


def dedicated_executor(executor_id: str, m: int, scheme: str = STANDARD) -> ExecutorSpec:
    return ExecutorSpec(executor_id, tuple(ThreadReservation(1, 1) for _ in range(m)), scheme)


@dataclass(frozen=True)
class CallbackGroup:
    id: str
    kind: str
    members: frozenset

    @property
    def exclusive(self) -> bool:
        return self.kind == MUTUALLY_EXCLUSIVE


@dataclass(frozen=True)
class SystemSpec:
    chains: Tuple[Chain, ...]
    executors: Tuple[ExecutorSpec, ...]
    groups: Tuple[CallbackGroup, ...] = ()
    assignment: Mapping[str, str] = field(default_factory=dict)
    propagation: Mapping[str, Tuple[int, ...]] = field(default_factory=dict)

    @cached_property
    def callbacks(self) -> Dict[str, Callback]:
        return {cb.id: cb for ch in self.chains for cb in ch.callbacks}

    @cached_property
    def _chains_by_id(self) -> Dict[str, Chain]:
        return {ch.id: ch for ch in self.chains}

    @cached_property
    def _executors_by_id(self) -> Dict[str, ExecutorSpec]:
        return {ex.id: ex for ex in self.executors}

    @cached_property
    def _group_index(self) -> Dict[str, CallbackGroup]:
        index = {}
        by_id = {g.id: g for g in self.groups}
        for g in self.groups:
            for member in g.members:
                index.setdefault(member, g)
        for cb in self.callbacks.values():
            if cb.id not in index and cb.group_id in by_id:
                index[cb.id] = by_id[cb.group_id]
        return index

    def chain(self, chain_id: str) -> Chain:
        return self._chains_by_id[chain_id]

    def executor(self, executor_id: str) -> ExecutorSpec:
        return self._executors_by_id[executor_id]

    def group_of(self, callback_id: str) -> CallbackGroup:
        """Group of a callback; ungrouped callbacks get a singleton reentrant group."""
        g = self._group_index.get(callback_id)
        if g is None:
            return CallbackGroup(f"~{callback_id}", REENTRANT, frozenset([callback_id]))
        return g

    def executor_of(self, callback_id: str) -> str:
        if callback_id in self.assignment:
            return self.assignment[callback_id]
        if len(self.executors) == 1:
            return self.executors[0].id
        raise KeyError(f"callback {callback_id!r} is not assigned to an executor")

    def delays(self, chain_id: str) -> Tuple[int, ...]:
        return tuple(self.propagation.get(chain_id, ()))

    def segments(self, chain_id: str) -> List[Tuple[str, Tuple[Callback, ...]]]:
        """Split a chain into maximal runs of callbacks on the same executor."""
        out: List[Tuple[str, List[Callback]]] = []
        for cb in self.chain(chain_id).callbacks:
            ex = self.executor_of(cb.id)
            if out and out[-1][0] == ex:
                out[-1][1].append(cb)
            else:
                out.append((ex, [cb]))
        return [(ex, tuple(cbs)) for ex, cbs in out]

    @property
    def has_arbitrary_deadlines(self) -> bool:
        return any(not ch.is_constrained for ch in self.chains)

    @property
    def has_exclusive_groups(self) -> bool:
        return any(g.exclusive for g in self.groups)

    def with_chains(self, chains: Iterable[Chain]) -> "SystemSpec":
        return replace(self, chains=tuple(chains))


def single_executor_system(chains: Iterable[Chain], executor: ExecutorSpec,
                           groups: Iterable[CallbackGroup] = ()) -> SystemSpec:
    chains = tuple(chains)
    assignment = {cb.id: executor.id for ch in chains for cb in ch.callbacks}
    return SystemSpec(chains, (executor,), tuple(groups), assignment)


@dataclass(frozen=True)
class AnalysisVerdict:
    chain_id: str
    bound: Optional[int]
    delta: Optional[int]
    iterations: int
    schedulable: bool
    parts: Tuple["AnalysisVerdict", ...] = ()

    @property
    def unbounded(self) -> bool:
        return self.bound is None

    def as_dict(self) -> dict:
        d = {
            "chain": self.chain_id,
            "bound": "unbounded" if self.bound is None else self.bound,
            "delta": self.delta,
            "iterations": self.iterations,
            "schedulable": self.schedulable,
        }
        if self.parts:
            d["subchains"] = [p.as_dict() for p in self.parts]
        return d


@dataclass
class ExecutorView:
    """Everything the per-executor analysis needs.

    ``chains`` are the analysis chains on the executor: whole chains, or the
    contiguous sub-chains of chains that span several executors (each such
    sub-chain inherits its parent's period, deadline and priority).
    """

    executor: ExecutorSpec
    chains: List[Chain]
    parent: Dict[str, str]
    groups: Dict[str, CallbackGroup]

    @property
    def m(self) -> int:
        return self.executor.m

    def group_of(self, callback_id: str) -> CallbackGroup:
        g = self.groups.get(callback_id)
        if g is None:
            return CallbackGroup(f"~{callback_id}", REENTRANT, frozenset([callback_id]))
        return g

    @cached_property
    def chain_of(self) -> Dict[str, Chain]:
        return {cb.id: ch for ch in self.chains for cb in ch.callbacks}

    @cached_property
    def callback_priority(self) -> Dict[str, int]:
        return {cb.id: cb.priority for ch in self.chains for cb in ch.callbacks}


def subchain_id(chain_id: str, k: int, n: int) -> str:
    return chain_id if n == 1 else f"{chain_id}#{k}"


def executor_view(system: SystemSpec, executor_id: str) -> ExecutorView:
    chains: List[Chain] = []
    parent: Dict[str, str] = {}
    for ch in system.chains:
        segs = system.segments(ch.id)
        for k, (ex, cbs) in enumerate(segs, start=1):
            if ex != executor_id:
                continue
            if len(segs) == 1:
                local = ch
            else:
                local = Chain(subchain_id(ch.id, k, len(segs)), cbs, ch.period,
                              ch.deadline, ch.priority,
                              ch.trigger if k == 1 else "event")
            chains.append(local)
            parent[local.id] = ch.id
    groups = {}
    for ch in chains:
        for cb in ch.callbacks:
            g = system.group_of(cb.id)
            if not g.id.startswith("~"):
                groups[cb.id] = g
    return ExecutorView(system.executor(executor_id), chains, parent, groups)


def validate(system: SystemSpec) -> List[str]:
    """Return human-readable invariant violations; empty when the spec is sound."""
    problems: List[str] = []

    def dupes(kind: str, ids: Iterable[str]) -> None:
        for name, n in Counter(ids).items():
            if n > 1:
                problems.append(f"{kind} {name!r}: id used {n} times")

    dupes("chain", (ch.id for ch in system.chains))
    dupes("callback", (cb.id for ch in system.chains for cb in ch.callbacks))
    dupes("executor", (ex.id for ex in system.executors))
    dupes("group", (g.id for g in system.groups))

    if not system.executors:
        problems.append("system: no executors")
    for ex in system.executors:
        if ex.m < 1:
            problems.append(f"executor {ex.id!r}: needs at least one thread")
        if ex.scheme not in SCHEMES:
            problems.append(f"executor {ex.id!r}: unknown scheme {ex.scheme!r}")
        for k, r in enumerate(ex.threads, start=1):
            if r.budget < 1 or r.period < r.budget:
                problems.append(
                    f"executor {ex.id!r} thread {k}: reservation ({r.budget},{r.period}) "
                    "needs 1 <= budget <= period")

    for name, n in Counter(ch.priority for ch in system.chains).items():
        if n > 1:
            problems.append(f"chain priority {name}: shared by {n} chains")

    for ch in system.chains:
        if not ch.callbacks:
            problems.append(f"chain {ch.id!r}: has no callbacks")
        if ch.period < 1:
            problems.append(f"chain {ch.id!r}: period must be >= 1")
        if ch.deadline < 1:
            problems.append(f"chain {ch.id!r}: deadline must be >= 1")
        for j, cb in enumerate(ch.callbacks, start=1):
            if cb.wcet < 1:
                problems.append(f"callback {cb.id!r}: wcet must be >= 1 (got {cb.wcet})")
            if cb.index != j or (cb.chain_id is not None and cb.chain_id != ch.id):
                problems.append(f"callback {cb.id!r}: position does not match chain {ch.id!r}")
            if cb.kind not in CALLBACK_KINDS:
                problems.append(f"callback {cb.id!r}: unknown kind {cb.kind!r}")
            elif cb.kind == TIMER and j != 1:
                problems.append(f"callback {cb.id!r}: only the first callback may be a timer")

    known_groups = {g.id for g in system.groups}
    membership: Dict[str, List[str]] = {}
    for g in system.groups:
        if g.kind not in GROUP_KINDS:
            problems.append(f"group {g.id!r}: unknown kind {g.kind!r}")
        for member in sorted(g.members):
            if member not in system.callbacks:
                problems.append(f"group {g.id!r}: unknown member {member!r}")
            membership.setdefault(member, []).append(g.id)
    for cb_id, gids in sorted(membership.items()):
        if len(gids) > 1:
            problems.append(f"callback {cb_id!r}: member of several groups {sorted(gids)}")
    for cb in system.callbacks.values():
        if cb.group_id is None:
            continue
        if cb.group_id not in known_groups:
            problems.append(f"callback {cb.id!r}: unknown group {cb.group_id!r}")
        elif cb.id in membership and cb.group_id not in membership[cb.id]:
            problems.append(f"callback {cb.id!r}: group_id disagrees with group membership")

    executor_ids = {ex.id for ex in system.executors}
    for cb_id in sorted(system.assignment):
        if cb_id not in system.callbacks:
            problems.append(f"assignment: unknown callback {cb_id!r}")
        elif system.assignment[cb_id] not in executor_ids:
            problems.append(
                f"callback {cb_id!r}: assigned to unknown executor {system.assignment[cb_id]!r}")
    if len(system.executors) != 1:
        for cb_id in system.callbacks:
            if cb_id not in system.assignment:
                problems.append(f"callback {cb_id!r}: not assigned to an executor")

    for g in system.groups:
        homes = set()
        for member in g.members:
            if member in system.callbacks:
                try:
                    homes.add(system.executor_of(member))
                except KeyError:
                    pass
        if len(homes) > 1:
            problems.append(f"group {g.id!r}: members spread over executors {sorted(homes)}")

    for chain_id, delays in system.propagation.items():
        if chain_id not in system._chains_by_id:
            problems.append(f"propagation: unknown chain {chain_id!r}")
        elif any(d < 0 for d in delays):
            problems.append(f"chain {chain_id!r}: negative propagation delay")
    return problems


def iter_callbacks(chains: Iterable[Chain]) -> Iterator[Callback]:
    for ch in chains:
        yield from ch.callbacks
