"""JSON interchange format for systems.

Layout::

    {"chains": [{"id", "priority", "period", "deadline", "trigger"?,
                 "callbacks": [{"id", "wcet", "kind"?, "priority"?, "group"?}]}],
     "executors": [{"id", "scheme", "threads": [{"budget", "period"}]}],
     "groups": [{"id", "kind", "members": [...]}],
     "assignment": {callback_id: executor_id},
     "propagation": {chain_id: [delay, ...]}}

Callback priorities are optional; when any is missing the chain-aware
assignment fills all of them.
"""

from __future__ import annotations

import json
from typing import List

from .assign import DuplicateChainPriority, apply_priorities
from .model import (REGULAR, TIMER, Callback, CallbackGroup, Chain, ExecutorSpec, SystemSpec,
                    ThreadReservation, validate)


class SpecError(ValueError):
    """The document is not a well-formed system description."""


def _int(obj: dict, key: str, where: str) -> int:
    if key not in obj:
        raise SpecError(f"{where}: missing {key!r}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise SpecError(f"{where}: {key!r} must be an integer, got {v!r}")
    return v


def _str(obj: dict, key: str, where: str, default=None) -> str:
    v = obj.get(key, default)
    if v is None:
        raise SpecError(f"{where}: missing {key!r}")
    return str(v)


def system_from_dict(doc: dict) -> SystemSpec:
    if not isinstance(doc, dict):
        raise SpecError("top level must be an object")
    try:
        chains: List[Chain] = []
        need_priorities = False
        for ci, c in enumerate(doc.get("chains", [])):
            cid = _str(c, "id", f"chains[{ci}]")
            where = f"chain {cid}"
            trigger = c.get("trigger", TIMER)
            cbs = []
            for j, cb in enumerate(c.get("callbacks", []), start=1):
                cb_id = _str(cb, "id", f"{where} callback {j}")
                kind = cb.get("kind", TIMER if j == 1 and trigger == TIMER else REGULAR)
                if "priority" not in cb:
                    need_priorities = True
                cbs.append(Callback(cb_id, _int(cb, "wcet", f"callback {cb_id}"),
                                    cb.get("priority", 0), kind, cb.get("group"), cid, j))
            period = _int(c, "period", where)
            chains.append(Chain(cid, tuple(cbs), period, c.get("deadline", period),
                                _int(c, "priority", where), trigger))
        if need_priorities and chains:
            chains = apply_priorities(chains)

        executors = []
        for ei, e in enumerate(doc.get("executors", [])):
            eid = _str(e, "id", f"executors[{ei}]")
            threads = tuple(ThreadReservation(_int(t, "budget", f"executor {eid}"),
                                              _int(t, "period", f"executor {eid}"))
                            for t in e.get("threads", []))
            executors.append(ExecutorSpec(eid, threads, e.get("scheme", "standard")))

        groups = []
        for gi, g in enumerate(doc.get("groups", [])):
            gid = _str(g, "id", f"groups[{gi}]")
            groups.append(CallbackGroup(gid, _str(g, "kind", f"group {gid}"),
                                        frozenset(g.get("members", []))))
        # a callback naming a group that is not declared gets it implicitly
        declared = {g.id for g in groups}
        for ch in chains:
            for cb in ch.callbacks:
                if cb.group_id is not None and cb.group_id not in declared:
                    raise SpecError(f"callback {cb.id}: group {cb.group_id!r} is not declared")
        groups = [CallbackGroup(g.id, g.kind, g.members | frozenset(
            cb.id for ch in chains for cb in ch.callbacks if cb.group_id == g.id))
            for g in groups]
        # members listed only in the group get the group id on the callback
        member_of = {cb: g.id for g in groups for cb in g.members}
        chains = [Chain(ch.id, tuple(
            Callback(cb.id, cb.wcet, cb.priority, cb.kind, cb.group_id or member_of.get(cb.id),
                     cb.chain_id, cb.index) for cb in ch.callbacks),
            ch.period, ch.deadline, ch.priority, ch.trigger) for ch in chains]

        assignment = {str(k): str(v) for k, v in doc.get("assignment", {}).items()}
        propagation = {str(k): tuple(int(x) for x in v)
                       for k, v in doc.get("propagation", {}).items()}
    except DuplicateChainPriority as exc:
        raise SpecError(str(exc)) from None
    except (AttributeError, TypeError) as exc:
        raise SpecError(f"malformed document: {exc}") from None
    return SystemSpec(tuple(chains), tuple(executors), tuple(groups), assignment, propagation)


def system_to_dict(system: SystemSpec) -> dict:
    doc = {
        "chains": [{
            "id": ch.id, "priority": ch.priority, "period": ch.period,
            "deadline": ch.deadline, "trigger": ch.trigger,
            "callbacks": [dict({"id": cb.id, "wcet": cb.wcet, "kind": cb.kind,
                                "priority": cb.priority},
                               **({"group": cb.group_id} if cb.group_id else {}))
                          for cb in ch.callbacks],
        } for ch in system.chains],
        "executors": [{
            "id": ex.id, "scheme": ex.scheme,
            "threads": [{"budget": r.budget, "period": r.period} for r in ex.threads],
        } for ex in system.executors],
        "groups": [{"id": g.id, "kind": g.kind, "members": sorted(g.members)}
                   for g in system.groups],
        "assignment": dict(system.assignment),
        "propagation": {k: list(v) for k, v in system.propagation.items()},
    }
    return doc


def load_system(text: str, check: bool = True) -> SystemSpec:
    """Parse and (by default) validate a JSON document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc}") from None
    system = system_from_dict(doc)
    if check:
        problems = validate(system)
        if problems:
            raise SpecError("; ".join(problems))
    return system


def dump_system(system: SystemSpec) -> str:
    return json.dumps(system_to_dict(system), indent=2)
