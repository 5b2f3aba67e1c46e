import pytest
from hypothesis import given, strategies as st

from mtrta.assign import DuplicateChainPriority, chain_aware_priorities
from mtrta.model import make_chain


def test_lower_chain_numbered_first():
    b = make_chain("B", [1, 1, 1], 10, priority=1)
    a = make_chain("A", [1, 1], 10, priority=2)
    prio = chain_aware_priorities([a, b])
    assert [prio[f"B.{j}"] for j in (1, 2, 3)] == [1, 2, 3]
    assert [prio[f"A.{j}"] for j in (1, 2)] == [4, 5]


def test_single_chain():
    prio = chain_aware_priorities([make_chain("X", [1] * 4, 10)])
    assert [prio[f"X.{j}"] for j in range(1, 5)] == [1, 2, 3, 4]


def test_duplicate_chain_priority_rejected():
    with pytest.raises(DuplicateChainPriority):
        chain_aware_priorities([make_chain("A", [1], 10, priority=3),
                                make_chain("B", [1], 10, priority=3)])


@given(st.lists(st.integers(1, 6), min_size=1, max_size=8, unique=False),
       st.randoms(use_true_random=False))
def test_assignment_properties(lengths, rnd):
    prios = list(range(len(lengths)))
    rnd.shuffle(prios)
    chains = [make_chain(f"c{k}", [1] * n, 10, priority=p)
              for k, (n, p) in enumerate(zip(lengths, prios))]
    prio = chain_aware_priorities(chains)
    assert sorted(prio.values()) == list(range(1, sum(lengths) + 1))
    for ch in chains:
        values = [prio[cb.id] for cb in ch.callbacks]
        assert values == sorted(values) and len(set(values)) == len(values)
    for lo in chains:
        for hi in chains:
            if lo.priority < hi.priority:
                assert max(prio[cb.id] for cb in lo.callbacks) < min(
                    prio[cb.id] for cb in hi.callbacks)
