"""Shared helpers comparing simulated response times with analytic bounds."""

from dataclasses import dataclass
from typing import List

from mtrta.rta import analyze_system
from mtrta.sim import RANDOMIZED, SYNCHRONOUS, SimConfig, simulate


@dataclass
class Violation:
    chain: str
    observed: int
    bound: int
    # every other chain met its deadlines in the run and the bound is within D
    premise: bool
    run: str


def runs(horizon, seeds, **kw):
    yield "sync", SimConfig(horizon=horizon, release_offsets=SYNCHRONOUS, **kw)
    for s in seeds:
        yield f"rand{s}", SimConfig(horizon=horizon, seed=s, release_offsets=RANDOMIZED, **kw)


def safety_violations(system, horizon, seeds=(1, 2, 3, 4, 5), method=None, verdicts=None,
                      **kw) -> List[Violation]:
    """Simulate ``system`` under each run configuration and report bound overruns."""
    if verdicts is None:
        verdicts = analyze_system(system, method)
    out = []
    for name, cfg in runs(horizon, seeds, **kw):
        res = simulate(system, cfg)
        for ch in system.chains:
            v = verdicts[ch.id]
            if v.bound is None:
                continue
            st = res.chains[ch.id]
            if st.worst_observed > v.bound:
                others_ok = all(res.chains[o.id].deadline_misses == 0
                                for o in system.chains if o.id != ch.id)
                out.append(Violation(ch.id, st.worst_observed, v.bound,
                                     others_ok and v.bound <= ch.deadline, name))
    return out
