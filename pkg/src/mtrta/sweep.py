"""Schedulability-ratio sweeps over random chain sets."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .gen import EQUAL_PERIOD, GenParams, build_system, generate_chain_set, with_scaled_deadlines
from .model import CONSTRAINED, Chain, executor_view
from .rta import METHODS, AnalysisConfig, solve_response_time

VARIABLES = ("utilization", "thread_count", "chain_count")
CSV_COLUMNS = ("sweep_variable", "value", "method", "schedulable", "total", "ratio")


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: Fraction
    stop: Fraction
    step: Fraction
    sets_per_point: int = 1000
    methods: Tuple[str, ...] = tuple(METHODS)
    # generator template; the swept field is overridden per point
    template: GenParams = field(default_factory=GenParams)
    m: int = 4
    # deadlines of the chain copies used by arbitrary-deadline methods
    arbitrary_deadline_factor: Fraction = Fraction(2)
    seed: int = 0

    def __post_init__(self):
        for name in ("start", "stop", "step", "arbitrary_deadline_factor"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        object.__setattr__(self, "methods", tuple(m.upper() for m in self.methods))
        if self.variable not in VARIABLES:
            raise ValueError(f"variable must be one of {VARIABLES}")
        if self.sets_per_point < 1:
            raise ValueError("sets_per_point must be >= 1")
        if self.step <= 0 or self.stop < self.start:
            raise ValueError("empty sweep range")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}")
        if self.variable != "utilization" and (self.start.denominator != 1 or
                                               self.step.denominator != 1):
            raise ValueError(f"{self.variable} sweeps need integer start and step")

    def points(self) -> List[Fraction]:
        out = []
        v = self.start
        while v <= self.stop:
            out.append(v)
            v += self.step
        return out


def sweep_spec_from_dict(doc: dict) -> SweepSpec:
    doc = dict(doc)
    rng = doc.pop("range", None)
    if rng is not None:
        doc["start"], doc["stop"] = rng
    tmpl = doc.pop("template", {}) or {}
    if "period_range" in tmpl:
        tmpl["period_range"] = tuple(tmpl["period_range"])
    doc["template"] = GenParams(**{k: (Fraction(str(v)) if k in ("total_utilization",
                                                                 "deadline_factor") else v)
                                   for k, v in tmpl.items()})
    for key in ("start", "stop", "step", "arbitrary_deadline_factor"):
        if key in doc:
            doc[key] = Fraction(str(doc[key]))
    if "methods" in doc:
        doc["methods"] = tuple(doc["methods"])
    return SweepSpec(**doc)


def load_sweep_spec(text: str) -> SweepSpec:
    return sweep_spec_from_dict(json.loads(text))


def set_schedulable(chains: Sequence[Chain], m: int, cfg: AnalysisConfig) -> bool:
    """True iff every chain meets its deadline; stops at the first failure."""
    view = executor_view(build_system(chains, m, cfg.scheme), "exec")
    limit = max(ch.deadline for ch in chains)
    cfg = replace(cfg, divergence_limit=limit)
    # low-priority chains fail most often, so checking them first exits early
    for ch in sorted(view.chains, key=lambda c: c.priority):
        if not solve_response_time(ch, view, cfg).schedulable:
            return False
    return True


def _point_params(spec: SweepSpec, value: Fraction, index: int) -> Tuple[GenParams, int]:
    p = spec.template
    m = spec.m
    if spec.variable == "utilization":
        p = replace(p, total_utilization=value)
    elif spec.variable == "chain_count":
        p = replace(p, chain_count=int(value))
    else:
        m = int(value)
    seed = f"{spec.seed}/{p.chain_count}/{p.total_utilization}/{index}"
    p = replace(p, deadline_mode=EQUAL_PERIOD, seed=seed)
    return p, m


def evaluate_point(spec: SweepSpec, value: Fraction) -> Dict[str, int]:
    """Schedulable-set count per method at one sweep point."""
    counts = {meth: 0 for meth in spec.methods}
    for i in range(spec.sets_per_point):
        p, m = _point_params(spec, value, i)
        chains = generate_chain_set(p)
        stretched = None
        for meth in spec.methods:
            scheme, dclass = METHODS[meth]
            cfg = AnalysisConfig(scheme=scheme, deadline_class=dclass)
            if dclass == CONSTRAINED:
                target = chains
            else:
                if stretched is None:
                    stretched = with_scaled_deadlines(chains, spec.arbitrary_deadline_factor)
                target = stretched
            if set_schedulable(target, m, cfg):
                counts[meth] += 1
    return counts


def _format_value(spec: SweepSpec, v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    return f"{float(v):g}"


def run_sweep(spec: SweepSpec, workers: int = 1) -> List[dict]:
    """One row per (point, method) in point order."""
    points = spec.points()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate_point, [spec] * len(points), points))
    else:
        results = [evaluate_point(spec, v) for v in points]
    rows = []
    for v, counts in zip(points, results):
        for meth in spec.methods:
            n = spec.sets_per_point
            rows.append({"sweep_variable": spec.variable, "value": _format_value(spec, v),
                         "method": meth, "schedulable": counts[meth], "total": n,
                         "ratio": counts[meth] / n})
    return rows


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(dict(r, ratio=f"{r['ratio']:.4f}"))
    return buf.getvalue()


def ratios(rows: Sequence[dict]) -> Dict[str, List[float]]:
    """method -> ratio per point, in point order."""
    out: Dict[str, List[float]] = {}
    for r in rows:
        out.setdefault(r["method"], []).append(r["ratio"])
    return out
