import math

import pytest

from mastlab.random_trees import RngSeed, uniform_tree, yule_tree
from mastlab.tree_core import parse_newick

CATERPILLAR_7 = "((((((1,2),3),4),5),6),7)"
CATERPILLAR_8 = "(((((((1,2),3),4),5),6),7),8)"
BALANCED_8 = "(((1,2),(3,4)),((5,6),(7,8)))"


def random_trees(n, count, seed=0, model="uniform"):
    make = uniform_tree if model == "uniform" else yule_tree
    return [make(n, RngSeed(seed, i)) for i in range(count)]


def ceil_sqrt(n):
    return math.ceil(math.sqrt(n))


@pytest.fixture
def balanced8():
    return parse_newick(BALANCED_8)


@pytest.fixture
def caterpillar7():
    return parse_newick(CATERPILLAR_7)
