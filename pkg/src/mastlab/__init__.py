"""Maximum agreement subtrees of rooted binary trees, greedy blobification,
random tree models and exact first-moment bounds."""

from .blobify import (
    Blob,
    Blobification,
    comb_leaf_count,
    greedy_blobification,
    greedy_comb_scaffold,
    matched_blob_agreement,
    verify_blobification,
)
from .mast import MastResult, count_agreement_sets, is_agreement_set, mast, mast_bruteforce
from .random_trees import RngSeed, SameShape, Uniform, Yule, relabel_uniform, sample_pair, uniform_tree, yule_tree
from .tree_core import (
    NewickError,
    Tree,
    TreeError,
    clade_leafset,
    enumerate_trees,
    parse_newick,
    restrict,
    shape_code,
    write_newick,
)

__version__ = "0.1.0"
