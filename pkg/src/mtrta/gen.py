"""Random chain-set generation for schedulability experiments."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .assign import apply_priorities
from .model import (MUTUALLY_EXCLUSIVE, STANDARD, CallbackGroup, Chain,
                    ExecutorSpec, SystemSpec, ThreadReservation, dedicated_executor, make_chain,
                    single_executor_system)

EQUAL_PERIOD = "equal_period"
SCALED = "scaled"


@dataclass(frozen=True)
class GenParams:
    chain_count: int = 5
    callbacks_per_chain: int = 10
    total_utilization: Fraction = Fraction(1)
    period_range: Tuple[int, int] = (100, 1000)
    deadline_mode: str = EQUAL_PERIOD
    deadline_factor: Fraction = Fraction(1)
    # int or str; str seeds give stable per-set streams in sweeps
    seed: Union[int, str] = 0

    def __post_init__(self):
        object.__setattr__(self, "total_utilization", Fraction(self.total_utilization))
        object.__setattr__(self, "deadline_factor", Fraction(self.deadline_factor))
        if self.chain_count < 1:
            raise ValueError("chain_count must be >= 1")
        if self.callbacks_per_chain < 1:
            raise ValueError("callbacks_per_chain must be >= 1")
        if self.total_utilization <= 0:
            raise ValueError("total_utilization must be > 0")
        lo, hi = self.period_range
        if not 1 <= lo <= hi:
            raise ValueError(f"bad period_range {self.period_range}")
        if self.deadline_mode not in (EQUAL_PERIOD, SCALED):
            raise ValueError(f"unknown deadline_mode {self.deadline_mode!r}")
        if self.deadline_factor <= 0:
            raise ValueError("deadline_factor must be > 0")


def _root_draw(rng: random.Random, k: int) -> Fraction:
    # r ** (1/k) for r uniform, kept strictly inside (0, 1) so shares stay positive
    while True:
        x = rng.random() ** (1.0 / k)
        if 0.0 < x < 1.0:
            return Fraction(x)


def uunifast(n: int, total, seed=0) -> List[Fraction]:
    """``n`` positive shares summing exactly to ``total``.

    The float draws are converted to exact fractions, so the shares telescope
    to ``total`` with no rounding.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    total = Fraction(total)
    if total <= 0:
        raise ValueError("total must be > 0")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    out = []
    remaining = total
    for i in range(1, n):
        nxt = remaining * _root_draw(rng, n - i)
        out.append(remaining - nxt)
        remaining = nxt
    out.append(remaining)
    return out


def log_uniform_period(rng: random.Random, lo: int, hi: int) -> int:
    if lo == hi:
        return lo
    return min(hi, max(lo, round(math.exp(rng.uniform(math.log(lo), math.log(hi))))))


def split_wcet(total: int, n: int, rng: random.Random) -> List[int]:
    """Split ``total`` into ``n`` integer parts >= 1 with uunifast proportions."""
    if total < n:
        raise ValueError(f"cannot split {total} into {n} parts of at least 1")
    shares = uunifast(n, 1, rng)
    spare = total - n
    parts = [1 + math.floor(s * spare) for s in shares]
    parts[-1] += total - sum(parts)
    return parts


def _deadline(p: GenParams, period: int) -> int:
    if p.deadline_mode == EQUAL_PERIOD:
        return period
    return max(1, math.floor(p.deadline_factor * period))


def generate_chain_set(p: GenParams) -> List[Chain]:
    """Chains only; chain ``k`` (1-based) gets priority ``k``, callbacks follow
    chain-aware priority order, and every chain head is a timer."""
    rng = random.Random(p.seed)
    utils = uunifast(p.chain_count, p.total_utilization, rng)
    lo, hi = p.period_range
    chains = []
    for k, u in enumerate(utils, start=1):
        period = log_uniform_period(rng, lo, hi)
        total = max(p.callbacks_per_chain, round(u * period))
        wcets = split_wcet(total, p.callbacks_per_chain, rng)
        chains.append(make_chain(f"c{k}", wcets, period, _deadline(p, period), priority=k))
    return apply_priorities(chains)


def with_scaled_deadlines(chains: Sequence[Chain], factor) -> List[Chain]:
    """Same chains with every deadline multiplied by ``factor`` (floored)."""
    factor = Fraction(factor)
    return [replace(ch, deadline=max(1, math.floor(ch.deadline * factor))) for ch in chains]


def build_system(chains: Sequence[Chain], m: int, scheme: str = STANDARD,
                 groups: Sequence[CallbackGroup] = ()) -> SystemSpec:
    """All chains on one executor of ``m`` dedicated threads."""
    return single_executor_system(chains, dedicated_executor("exec", m, scheme), groups)


def generate_system(p: GenParams, m: int, scheme: str = STANDARD) -> SystemSpec:
    return build_system(generate_chain_set(p), m, scheme)


def case_study_chains(wcets: Optional[Sequence[Sequence[int]]] = None,
                      periods: Sequence[int] = (60, 100, 150, 250),
                      deadlines: Optional[Sequence[int]] = None) -> List[Chain]:
    """Four three-callback chains with priorities 4, 3, 2, 1 (first chain highest)."""
    if wcets is None:
        wcets = ((4, 6, 5), (5, 7, 4), (6, 5, 8), (7, 6, 9))
    deadlines = deadlines or periods
    chains = [make_chain(f"g{k + 1}", w, periods[k], deadlines[k], priority=4 - k)
              for k, w in enumerate(wcets)]
    return apply_priorities(chains)


def case_study_system(m: int = 4, scheme: str = STANDARD, exclusive: bool = False,
                      **kw) -> SystemSpec:
    """Case-study workload on one executor.

    With ``exclusive`` the callbacks of the two highest-priority chains share
    one mutually-exclusive group.
    """
    chains = case_study_chains(**kw)
    groups = ()
    if exclusive:
        members = frozenset(cb.id for ch in chains[:2] for cb in ch.callbacks)
        groups = (CallbackGroup("me", MUTUALLY_EXCLUSIVE, members),)
        chains = [replace(ch, callbacks=tuple(
            replace(cb, group_id="me") if cb.id in members else cb for cb in ch.callbacks))
            for ch in chains]
    return build_system(chains, m, scheme, groups)


def case_study_two_executors(m: int = 2, scheme: str = STANDARD, delay: int = 1) -> SystemSpec:
    """Case-study chains split over two executors with a hop delay on each crossing."""
    chains = case_study_chains()
    first = {"g1.1", "g1.3", "g2.3", "g3.1", "g3.3", "g4.1"}
    assignment = {cb.id: ("e1" if cb.id in first else "e2") for ch in chains for cb in ch.callbacks}
    executors = (dedicated_executor("e1", m, scheme), dedicated_executor("e2", m, scheme))
    system = SystemSpec(tuple(chains), executors, (), assignment, {})
    hops = {}
    for ch in chains:
        n = len(system.segments(ch.id)) - 1
        if n:
            hops[ch.id] = tuple([delay] * n)
    return replace(system, propagation=hops)


def reservation_executor(executor_id: str, reservations: Sequence[Tuple[int, int]],
                         scheme: str = STANDARD) -> ExecutorSpec:
    return ExecutorSpec(executor_id, tuple(ThreadReservation(c, t) for c, t in reservations),
                        scheme)
