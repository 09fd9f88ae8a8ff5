"""Random tree models: uniform on RB(n), Yule-Harding, and same-shape relabeling.

Randomness comes from numpy's Philox counter-based bit generator. A replicate
stream is keyed by ``SeedSequence(master, spawn_key=(stream,))``, so the draws
of replicate ``i`` never depend on how many other replicates ran or in which
order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .tree_core import Tree, TreeError

RNG_ALGORITHM = "numpy.random.Philox (4x64-10) seeded by SeedSequence(master, spawn_key=(stream,))"


@dataclass(frozen=True)
class RngSeed:
    master: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master, spawn_key=(self.stream,))
        return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class Uniform:
    n: int


@dataclass(frozen=True)
class Yule:
    n: int


@dataclass(frozen=True)
class SameShape:
    base: Tree

    @property
    def n(self) -> int:
        return self.base.leaf_count


TreeModel = Union[Uniform, Yule, SameShape]


def _as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, RngSeed):
        return seed.generator()
    return RngSeed(int(seed)).generator()


def _check_n(n: int):
    if n < 1:
        raise TreeError("n must be at least 1")


def uniform_tree(n: int, seed) -> Tree:
    """Uniform draw from RB(n) by sequential leaf insertion.

    Leaf i (i >= 2) subdivides the edge above one of the 2i - 3 existing
    nodes, chosen uniformly; choosing the root adds a new root. Every tree
    arises from exactly one choice sequence.
    """
    _check_n(n)
    rng = _as_generator(seed)
    if n == 1:
        return Tree((-1,), (-1,), (1,), 0)
    # node count before inserting leaf i is 2i - 3
    picks = rng.integers(0, np.arange(1, 2 * n - 2, 2)).tolist()
    size = 2 * n - 1
    left = [-1] * size
    right = [-1] * size
    label = [0] * size
    parent = [-1] * size
    label[0] = 1
    root = 0
    for i in range(2, n + 1):
        x = picks[i - 2]
        leaf = 2 * i - 3
        joint = leaf + 1
        label[leaf] = i
        p = parent[x]
        left[joint] = x
        right[joint] = leaf
        parent[joint] = p
        parent[x] = joint
        parent[leaf] = joint
        if p == -1:
            root = joint
        elif left[p] == x:
            left[p] = joint
        else:
            right[p] = joint
    return Tree(tuple(left), tuple(right), tuple(label), root)


def yule_tree(n: int, seed) -> Tree:
    """Yule-Harding draw: split a uniformly chosen current leaf until there
    are ``n`` leaves, then label the leaves by a uniform permutation of 1..n."""
    _check_n(n)
    rng = _as_generator(seed)
    if n == 1:
        return Tree((-1,), (-1,), (1,), 0)
    # splitting step j picks among the j current leaves, j = 2..n-1
    picks = rng.integers(0, np.arange(2, n)).tolist() if n > 2 else []
    perm = (rng.permutation(n) + 1).tolist()
    size = 2 * n - 1
    left = [-1] * size
    right = [-1] * size
    left[0], right[0] = 1, 2
    current = [1, 2]  # leaf node ids, in creation order
    nxt = 3
    for j in picks:
        v = current[j]
        a, b = nxt, nxt + 1
        nxt += 2
        left[v], right[v] = a, b
        current[j] = a
        current.append(b)
    label = [0] * size
    for node, lab in zip(current, perm):
        label[node] = lab
    return Tree(tuple(left), tuple(right), tuple(label), 0)


def relabel_uniform(base: Tree, seed) -> Tree:
    """Apply a uniformly random permutation of ``labels(base)`` to the leaves."""
    rng = _as_generator(seed)
    leaves = [v for v in range(base.node_count) if base.left[v] == -1]
    values = sorted(base.label[v] for v in leaves)
    perm = rng.permutation(len(values)).tolist()
    mapping = {values[i]: values[perm[i]] for i in range(len(values))}
    label = tuple(mapping[l] if a == -1 else 0 for a, l in zip(base.left, base.label))
    return Tree(base.left, base.right, label, base.root)


def sample_tree(model: TreeModel, seed) -> Tree:
    rng = _as_generator(seed)
    if isinstance(model, Uniform):
        return uniform_tree(model.n, rng)
    if isinstance(model, Yule):
        return yule_tree(model.n, rng)
    if isinstance(model, SameShape):
        return relabel_uniform(model.base, rng)
    raise TypeError(f"unknown tree model {model!r}")


def sample_pair(model: TreeModel, seed) -> tuple[Tree, Tree]:
    """Two independent draws from ``model`` sharing one stream.

    For ``SameShape`` both trees are independent relabelings of the base,
    so the second is a uniformly random relabeling of the first.
    """
    rng = _as_generator(seed)
    return sample_tree(model, rng), sample_tree(model, rng)
