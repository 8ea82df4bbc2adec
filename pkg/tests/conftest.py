import pytest

from conceptkit import parse_obo

from helpers import CHAIN_OBO, tree_graph


@pytest.fixture(scope="session")
def chain_graph():
    """Three-node is_a chain: TEST:C -> TEST:B -> TEST:A."""
    return parse_obo(CHAIN_OBO)


@pytest.fixture(scope="session")
def small_tree():
    """Complete 4-ary tree of depth 2, 21 concepts, prefix TR."""
    return tree_graph()
