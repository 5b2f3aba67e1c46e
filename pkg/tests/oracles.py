"""Brute-force reference implementations, kept independent of the package."""

from functools import lru_cache


def min_supply(budget: int, period: int, delta: int) -> int:
    """Least supply a (budget, period) reservation can give in any window of ``delta``.

    Enumerates every contiguous placement of the budget in each period and
    every window start inside the first period. Contiguous placements are
    enough: inside one period, the supply a window sees is minimised by
    pushing the budget away from the window.
    """
    if delta == 0:
        return 0
    periods = delta // period + 2
    offsets = range(period - budget + 1)
    best = None

    def walk(k, placed):
        nonlocal best
        if k == periods:
            avail = set()
            for i, o in enumerate(placed):
                avail.update(range(i * period + o, i * period + o + budget))
            for start in range(period):
                got = sum(1 for u in range(start, start + delta) if u in avail)
                if best is None or got < best:
                    best = got
            return
        for o in offsets:
            walk(k + 1, placed + [o])

    walk(0, [])
    return best


@lru_cache(maxsize=None)
def _best_overlap(wcet: int, delta: int, alpha: int):
    """release -> most overlap with [0, delta) of a job started within alpha of release."""
    lo = -alpha - wcet
    out = {}
    for r in range(lo, delta + 1):
        best = 0
        for s in range(r, r + alpha + 1):
            ov = min(s + wcet, delta) - max(s, 0)
            best = max(best, ov)
        out[r] = best
    return out


def max_window_work(wcet: int, period: int, delta: int, alpha: int) -> int:
    """Most work periodic jobs of (wcet, period) can execute inside [0, delta).

    Each job may start anywhere up to ``alpha`` after its release and then
    runs ``wcet`` units without interruption. All release phases are tried.
    """
    if delta == 0:
        return 0
    table = _best_overlap(wcet, delta, alpha)
    lo = -alpha - wcet
    best = 0
    for phase in range(period):
        # releases phase + k*period that can still touch the window
        first = phase - ((phase - lo) // period) * period
        total = 0
        r = first
        while r <= delta:
            total += table.get(r, 0)
            r += period
        best = max(best, total)
    return best


def staircase_supply(budget: int, period: int, delta: int) -> int:
    """Supply of the explicit worst-case pattern: 2(T-C) blackout, then C on / T-C off."""
    gap = 2 * (period - budget)
    return sum(1 for u in range(delta) if u >= gap and (u - gap) % period < budget)


def max_window_work_sequential(wcet: int, period: int, delta: int, alpha: int) -> int:
    """Upper bound on the work of one task whose jobs never run in parallel.

    Jobs executing one at a time cannot deliver more than ``delta`` inside the
    window, and never more than the overlapping-jobs maximum.
    """
    return min(delta, max_window_work(wcet, period, delta, alpha))
