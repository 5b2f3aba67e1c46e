"""Workload and blocking terms that make up each demand-bound function.

``alpha`` is the carry-in extension of a workload window. The analysis uses
the deadline-based value ``D - E`` throughout (clamped at zero for chains
whose total WCET already exceeds their deadline).
"""

from __future__ import annotations

from typing import Iterable, List, Optional, Sequence

from .model import Callback, Chain, ExecutorView


def carry_in(chain: Chain) -> int:
    return max(0, chain.deadline - chain.total_wcet)


def _cdiv(a: int, b: int) -> int:
    return -(-a // b)


def workload_task(wcet: int, period: int, delta: int, alpha: int = 0) -> int:
    """Maximum work of a constrained-deadline periodic task in ``delta``."""
    span = delta + alpha
    n = span // period
    return n * wcet + min(wcet, span - n * period)


def workload_cd(total_wcet: int, period: int, delta: int, alpha: int) -> int:
    # the carry-out term subtracts from delta, not delta + alpha
    n = (delta + alpha) // period
    return n * total_wcet + max(0, min(total_wcet, delta - n * period))


def workload_ad(total_wcet: int, period: int, delta: int, alpha: int) -> int:
    return _cdiv(delta + alpha, period) * total_wcet


def workload_chain_cd(chain: Chain, delta: int, alpha: Optional[int] = None) -> int:
    """Work a constrained-deadline chain can execute in a window of ``delta``."""
    if not chain.is_constrained:
        raise ValueError(
            f"chain {chain.id!r} has an arbitrary deadline; use workload_chain_ad")
    if alpha is None:
        alpha = carry_in(chain)
    return workload_cd(chain.total_wcet, chain.period, delta, alpha)


def workload_chain_ad(chain: Chain, delta: int, alpha: Optional[int] = None) -> int:
    if alpha is None:
        alpha = carry_in(chain)
    return workload_ad(chain.total_wcet, chain.period, delta, alpha)


def precedence_blocking(chain: Chain, m: int) -> int:
    """Artificial load charged while the predecessors of the last callback run."""
    return m * (chain.total_wcet - chain.last_wcet)


def _lower_chains(target: Chain, chains: Iterable[Chain]) -> List[Chain]:
    return [ch for ch in chains if ch.priority < target.priority]


def _blocking_candidates(target: Chain, chains: Iterable[Chain], delta: int):
    # one candidate value per lower-priority chain: its largest callback
    cands = [(min(ch.max_callback_wcet - 1, delta), ch.id, ch)
             for ch in _lower_chains(target, chains)]
    # largest first; ties broken by chain id for determinism
    cands.sort(key=lambda c: (-c[0], c[1]))
    return cands


def mlp_blocking(target: Chain, chains: Sequence[Chain], m: int, delta: int) -> int:
    """Blocking from at most ``m`` lower-priority callbacks, one per chain."""
    cands = _blocking_candidates(target, chains, delta)
    return sum(c[0] for c in cands[:m])


def mlp_star_blocking(target: Chain, chains: Sequence[Chain], m: int, delta: int) -> int:
    """Like :func:`mlp_blocking`, but one callback per outstanding instance."""
    left = m
    total = 0
    for value, _, ch in _blocking_candidates(target, chains, delta):
        if left == 0:
            break
        instances = _cdiv(delta + carry_in(ch), ch.period)
        take = min(left, max(0, instances))
        total += take * value
        left -= take
    return total


def groupmates_load(cb: Callback, view: ExecutorView, delta: int, cd: bool,
                    higher_only: bool = False) -> int:
    """Work of mutually-exclusive group-mates of ``cb`` released in ``delta``.

    Under constrained deadlines, mates from the callback's own chain are
    skipped because precedence blocking already covers them.
    """
    group = view.group_of(cb.id)
    if not group.exclusive:
        return 0
    own = view.parent[view.chain_of[cb.id].id]
    prio = view.callback_priority
    total = 0
    for mate_id in sorted(group.members):
        if mate_id == cb.id or mate_id not in view.chain_of:
            continue
        x = view.chain_of[mate_id]
        if cd and view.parent[x.id] == own:
            continue
        if higher_only and not prio[mate_id] > prio[cb.id]:
            continue
        mate_wcet = next(c.wcet for c in x.callbacks if c.id == mate_id)
        total += _cdiv(delta + carry_in(x), x.period) * mate_wcet
    return total


def hp_groupmates_load(cb: Callback, view: ExecutorView, delta: int, cd: bool) -> int:
    return groupmates_load(cb, view, delta, cd, higher_only=True)
