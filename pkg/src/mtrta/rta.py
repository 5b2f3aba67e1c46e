"""Demand-bound functions, the fixed-point search and end-to-end composition.

Four analyses are selected by an :class:`AnalysisConfig`:

=========  ================  =============
method     executor scheme   deadlines
=========  ================  =============
PWA_CD     standard          constrained
PPWA_CD    priority-driven   constrained
PWA_AD     standard          arbitrary
PPWA_AD    priority-driven   arbitrary
=========  ================  =============

Mutually-exclusive callback groups add a group-mate term to each of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

from . import demand
from .model import (ARBITRARY, CONSTRAINED, PRIORITY_DRIVEN, STANDARD, AnalysisVerdict,
                    Chain, ExecutorSpec, ExecutorView, SystemSpec, executor_view, subchain_id)
from .supply import inverse_executor_supply, max_inverse_sbf, sbf_executor

METHODS = {
    "PWA_CD": (STANDARD, CONSTRAINED),
    "PPWA_CD": (PRIORITY_DRIVEN, CONSTRAINED),
    "PWA_AD": (STANDARD, ARBITRARY),
    "PPWA_AD": (PRIORITY_DRIVEN, ARBITRARY),
}


class ConfigError(ValueError):
    """Analysis configuration does not fit the system under analysis."""


@dataclass(frozen=True)
class AnalysisConfig:
    scheme: str = STANDARD
    deadline_class: str = CONSTRAINED
    # None: enabled iff the executor hosts a mutually-exclusive group
    groups_enabled: Optional[bool] = None
    # None: max(2 * hyperperiod, 10 * max deadline)
    divergence_limit: Optional[int] = None

    @property
    def method(self) -> str:
        for name, key in METHODS.items():
            if key == (self.scheme, self.deadline_class):
                return name
        raise ConfigError(f"no method for {self.scheme}/{self.deadline_class}")


def method_config(method: str, **kw) -> AnalysisConfig:
    try:
        scheme, dclass = METHODS[method.upper()]
    except KeyError:
        raise ConfigError(f"unknown method {method!r}; pick one of {sorted(METHODS)}") from None
    return AnalysisConfig(scheme=scheme, deadline_class=dclass, **kw)


def default_divergence_limit(chains: Sequence[Chain]) -> int:
    hyper = math.lcm(*(ch.period for ch in chains))
    return max(2 * hyper, 10 * max(ch.deadline for ch in chains))


def _check_config(view: ExecutorView, cfg: AnalysisConfig) -> None:
    if cfg.deadline_class == CONSTRAINED:
        bad = [ch.id for ch in view.chains if not ch.is_constrained]
        if bad:
            raise ConfigError(
                f"constrained-deadline analysis requested but chains {bad} have D > T")
    if cfg.divergence_limit is not None:
        dmax = max(ch.deadline for ch in view.chains)
        if cfg.divergence_limit < dmax:
            raise ConfigError(f"divergence_limit {cfg.divergence_limit} below max deadline {dmax}")


def _groups_on(view: ExecutorView, cfg: AnalysisConfig) -> bool:
    if cfg.groups_enabled is not None:
        return cfg.groups_enabled
    return any(g.exclusive for g in view.groups.values())


def demand_function(target: Chain, view: ExecutorView, cfg: AnalysisConfig) -> Callable[[int], int]:
    """Return ``dbf(delta)`` for ``target`` under the configured method."""
    m = view.m
    chains = view.chains
    priority = cfg.scheme == PRIORITY_DRIVEN
    cd = cfg.deadline_class == CONSTRAINED
    base = demand.precedence_blocking(target, m)

    if cd:
        if priority:
            # sibling sub-chains share the target's priority; count them in full
            interfering = [ch for ch in chains if ch.id != target.id and (
                ch.priority > target.priority or view.parent[ch.id] == view.parent[target.id])]
        else:
            interfering = [ch for ch in chains if ch.id != target.id]
        terms = [(ch.total_wcet, ch.period, demand.carry_in(ch)) for ch in interfering]
        workload = demand.workload_cd
    else:
        if priority:
            interfering = [ch for ch in chains if ch.priority >= target.priority]
        else:
            interfering = list(chains)
        terms = [(ch.total_wcet, ch.period, demand.carry_in(ch)) for ch in interfering]
        workload = demand.workload_ad
        # the instance under analysis is counted inside its own workload term
        base -= target.total_wcet

    if priority:
        blocking = demand.mlp_blocking if cd else demand.mlp_star_blocking
    else:
        blocking = None

    if _groups_on(view, cfg):
        mates = demand.hp_groupmates_load if priority else demand.groupmates_load
        exclusive = [cb for cb in target.callbacks if view.group_of(cb.id).exclusive]
    else:
        exclusive = []

    def dbf(delta: int) -> int:
        total = base
        for e, t, a in terms:
            total += workload(e, t, delta, a)
        if blocking is not None:
            total += blocking(target, chains, m, delta)
        for cb in exclusive:
            total += m * mates(cb, view, delta, cd)
        return total

    return dbf


def dbf(target: Chain, view: ExecutorView, delta: int, cfg: AnalysisConfig) -> int:
    return demand_function(target, view, cfg)(delta)


def fixed_point(demand_fn: Callable[[int], int], ex: ExecutorSpec,
                limit: int) -> Tuple[Optional[int], int]:
    """Smallest ``delta >= 1`` with ``demand_fn(delta) < sbf(delta)``.

    Each step jumps straight to the smallest interval whose supply exceeds the
    current demand; no interval skipped that way can satisfy the test because
    demand is nondecreasing. Returns ``(None, iterations)`` past ``limit``.
    """
    dedicated = all(r.budget == r.period for r in ex.threads)
    m = ex.m
    delta = 1
    iterations = 0
    while True:
        iterations += 1
        d = demand_fn(delta)
        supply = m * delta if dedicated else sbf_executor(ex, delta)
        if d < supply:
            return delta, iterations
        delta = inverse_executor_supply(ex, d)
        if delta > limit:
            return None, iterations


def solve_response_time(target: Chain, view: ExecutorView, cfg: AnalysisConfig) -> AnalysisVerdict:
    _check_config(view, cfg)
    limit = cfg.divergence_limit or default_divergence_limit(view.chains)
    delta, iterations = fixed_point(demand_function(target, view, cfg), view.executor, limit)
    if delta is None:
        return AnalysisVerdict(target.id, None, None, iterations, False)
    bound = delta + max_inverse_sbf(view.executor.threads, target.last_wcet - 1)
    return AnalysisVerdict(target.id, bound, delta, iterations, bound <= target.deadline)


class Task(NamedTuple):
    wcet: int
    period: int
    deadline: int
    priority: int


def rta_np_fp_task(task: Task, taskset: Sequence[Task], ex: ExecutorSpec,
                   divergence_limit: Optional[int] = None) -> AnalysisVerdict:
    """Global non-preemptive fixed-priority bound for independent tasks.

    Higher-priority tasks interfere through the periodic-task workload; at
    most ``m`` lower-priority tasks block with ``min(E - 1, delta)`` each.
    """
    m = ex.m
    others = [t for t in taskset if t is not task]
    hp = [t for t in others if t.priority > task.priority]
    lp = [t for t in others if t.priority < task.priority]

    def dbf_task(delta: int) -> int:
        total = sum(demand.workload_task(h.wcet, h.period, delta, max(0, h.deadline - h.wcet))
                    for h in hp)
        block = sorted((min(l.wcet - 1, delta) for l in lp), reverse=True)
        return total + sum(block[:m])

    limit = divergence_limit
    if limit is None:
        limit = max(2 * math.lcm(*(t.period for t in taskset)),
                    10 * max(t.deadline for t in taskset))
    delta, iterations = fixed_point(dbf_task, ex, limit)
    name = f"task@{task.priority}"
    if delta is None:
        return AnalysisVerdict(name, None, None, iterations, False)
    bound = delta + max_inverse_sbf(ex.threads, task.wcet - 1)
    return AnalysisVerdict(name, bound, delta, iterations, bound <= task.deadline)


ConfigSpec = Union[None, str, AnalysisConfig, Mapping[str, AnalysisConfig]]


def config_for(system: SystemSpec, executor_id: str, cfg: ConfigSpec = None) -> AnalysisConfig:
    """Resolve the analysis configuration of one executor.

    ``cfg`` may be a method name (applied to every executor), a single config,
    a per-executor mapping, or None to follow each executor's own scheme and
    the system's deadline class.
    """
    if isinstance(cfg, Mapping):
        if executor_id in cfg:
            return cfg[executor_id]
        cfg = None
    if isinstance(cfg, str):
        return method_config(cfg)
    if isinstance(cfg, AnalysisConfig):
        return cfg
    dclass = ARBITRARY if system.has_arbitrary_deadlines else CONSTRAINED
    return AnalysisConfig(scheme=system.executor(executor_id).scheme, deadline_class=dclass)


def analyze_executor(system: SystemSpec, executor_id: str,
                     cfg: ConfigSpec = None) -> Dict[str, AnalysisVerdict]:
    view = executor_view(system, executor_id)
    if not view.chains:
        return {}
    c = config_for(system, executor_id, cfg)
    return {ch.id: solve_response_time(ch, view, c) for ch in view.chains}


def end_to_end(chain: Chain, parts: Sequence[AnalysisVerdict],
               delays: Sequence[int] = ()) -> AnalysisVerdict:
    """Compose sub-chain verdicts: sum of bounds plus propagation delays."""
    if len(parts) == 1:
        p = parts[0]
        return replace(p, chain_id=chain.id,
                       schedulable=p.bound is not None and p.bound <= chain.deadline)
    iterations = sum(p.iterations for p in parts)
    if any(p.bound is None for p in parts):
        return AnalysisVerdict(chain.id, None, None, iterations, False, tuple(parts))
    delays = list(delays) + [0] * (len(parts) - 1 - len(delays))
    bound = sum(p.bound for p in parts) + sum(delays[:len(parts) - 1])
    return AnalysisVerdict(chain.id, bound, parts[-1].delta, iterations,
                           bound <= chain.deadline, tuple(parts))


def analyze_system(system: SystemSpec, cfg: ConfigSpec = None) -> Dict[str, AnalysisVerdict]:
    """Per-chain end-to-end verdicts for every chain of ``system``."""
    local: Dict[str, AnalysisVerdict] = {}
    for ex in system.executors:
        local.update(analyze_executor(system, ex.id, cfg))
    out = {}
    for ch in system.chains:
        segs = system.segments(ch.id)
        parts: List[AnalysisVerdict] = []
        for k in range(1, len(segs) + 1):
            parts.append(local[subchain_id(ch.id, k, len(segs))])
        out[ch.id] = end_to_end(ch, parts, system.delays(ch.id))
    return out


def system_schedulable(verdicts: Mapping[str, AnalysisVerdict]) -> bool:
    return all(v.schedulable for v in verdicts.values())
