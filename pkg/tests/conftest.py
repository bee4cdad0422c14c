import pytest
from hypothesis import strategies as st

from mkpsim import Instance


@pytest.fixture
def instance_a() -> Instance:
    """The fixed reference instance: capacities [10, 7]; items
    (8,4), (6,4), (7,7), (3,6); exact optimum 21."""
    return Instance.from_pairs([(8, 4), (6, 4), (7, 7), (3, 6)], [10, 7])


def small_instances(
    max_m: int = 6,
    max_n: int = 3,
    max_cost: int = 20,
    max_weight: int = 12,
    max_cap: int = 30,
):
    """Strategy for desk-scale instances (small enough for brute force)."""
    pair = st.tuples(
        st.integers(min_value=0, max_value=max_cost),
        st.integers(min_value=1, max_value=max_weight),
    )
    return st.builds(
        Instance.from_pairs,
        st.lists(pair, min_size=0, max_size=max_m),
        st.lists(st.integers(min_value=0, max_value=max_cap), min_size=1, max_size=max_n),
    )
