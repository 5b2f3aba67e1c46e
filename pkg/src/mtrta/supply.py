"""Supply lower bounds for periodic CPU reservations backing worker threads.

The linear bound is evaluated with :class:`fractions.Fraction` so that the
demand/supply comparison of the fixed-point iteration is exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

from .model import ExecutorSpec, ThreadReservation


def blackout(r: ThreadReservation) -> int:
    """Longest interval with no supply: 2(T - C)."""
    return 2 * (r.period - r.budget)


def sbf_exact(r: ThreadReservation, delta: int) -> int:
    """Worst-case staircase supply of reservation ``r`` over ``delta`` units.

    The interval starts with the maximal blackout, then receives ``C`` units
    at the start of every following period.
    """
    y = max(0, delta - blackout(r))
    full = y // r.period
    return full * r.budget + min(r.budget, y - full * r.period)


def sbf_linear(r: ThreadReservation, delta: int) -> Fraction:
    b = blackout(r)
    if delta < b:
        return Fraction(0)
    return Fraction(r.budget, r.period) * (delta - b)


def sbf_executor(ex: ExecutorSpec, delta: int) -> Fraction:
    return sum((sbf_linear(r, delta) for r in ex.threads), Fraction(0))


def inverse_sbf(r: ThreadReservation, x: int) -> int:
    """Smallest integer interval whose linear supply reaches ``x``."""
    if x <= 0:
        return 0
    return -(-x * r.period // r.budget) + blackout(r)


def max_inverse_sbf(threads: Iterable[ThreadReservation], x: int) -> int:
    """Interval needed by the slowest thread to deliver ``x`` units."""
    return max(inverse_sbf(r, x) for r in threads)


def inverse_executor_supply(ex: ExecutorSpec, demand) -> int:
    """Smallest integer ``delta`` with ``sbf_executor(ex, delta) > demand``.

    The summed linear curve is piecewise linear with a breakpoint at each
    thread's blackout length, so each segment is solved in closed form.
    """
    threads = ex.threads
    if all(r.budget == r.period for r in threads):
        # m dedicated cores: m * delta > demand
        return int(demand // len(threads)) + 1
    demand = Fraction(demand)
    points = sorted(set(blackout(r) for r in threads))
    for i, start in enumerate(points):
        end = points[i + 1] if i + 1 < len(points) else None
        slope = Fraction(0)
        offset = Fraction(0)
        for r in threads:
            if blackout(r) <= start:
                s = Fraction(r.budget, r.period)
                slope += s
                offset += s * blackout(r)
        # slope * delta - offset > demand
        candidate = max(start, int((demand + offset) // slope) + 1)
        if end is None or candidate < end:
            return candidate
    raise AssertionError("unreachable: last segment is unbounded")


def supply_slope(ex: ExecutorSpec) -> Fraction:
    return sum((Fraction(r.budget, r.period) for r in ex.threads), Fraction(0))

