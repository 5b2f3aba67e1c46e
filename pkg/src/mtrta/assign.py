"""Chain-aware callback priority assignment."""

from __future__ import annotations

from dataclasses import replace
from typing import Dict, Iterable, List

from .model import Chain, SystemSpec


class DuplicateChainPriority(ValueError):
    pass


def chain_aware_priorities(chains: Iterable[Chain]) -> Dict[str, int]:
    """Map callback id -> priority so that chain priority dominates.

    Chains are visited from lowest to highest priority and callbacks are
    numbered 1, 2, 3, ... front to back, so later callbacks of a chain
    outrank earlier ones and every callback of a higher-priority chain
    outranks every callback of a lower-priority chain.
    """
    chains = list(chains)
    seen = set()
    for ch in chains:
        if ch.priority in seen:
            raise DuplicateChainPriority(f"chain priority {ch.priority} is not unique")
        seen.add(ch.priority)
    out: Dict[str, int] = {}
    p = 1
    for ch in sorted(chains, key=lambda c: c.priority):
        for cb in ch.callbacks:
            out[cb.id] = p
            p += 1
    return out


def apply_priorities(chains: Iterable[Chain]) -> List[Chain]:
    chains = list(chains)
    prio = chain_aware_priorities(chains)
    return [replace(ch, callbacks=tuple(replace(cb, priority=prio[cb.id]) for cb in ch.callbacks))
            for ch in chains]


def with_chain_aware_priorities(system: SystemSpec) -> SystemSpec:
    return system.with_chains(apply_priorities(system.chains))
