"""Maximum agreement subtree of two rooted binary trees on the same labels."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numba
import numpy as np

from .tree_core import LeafSet, Tree, TreeError, restrict

#: largest n accepted by the exhaustive-subset oracles
BRUTEFORCE_LIMIT = 12


@dataclass(frozen=True)
class MastResult:
    size: int
    witness: LeafSet


def is_agreement_set(t1: Tree, t2: Tree, s) -> bool:
    """True iff ``t1|s`` and ``t2|s`` are the same labeled tree."""
    s = frozenset(s)
    if not s:
        raise TreeError("agreement set must be non-empty")
    if not s <= (t1.labels & t2.labels):
        raise TreeError("leaf set is not contained in both trees")
    return restrict(t1, s) == restrict(t2, s)


def _check_same_labels(t1: Tree, t2: Tree):
    if t1.labels != t2.labels:
        raise TreeError("trees have different leaf label sets")


def _arrays(t: Tree):
    """Postorder position arrays: children as positions, leaf labels."""
    order = t.postorder
    pos = {v: i for i, v in enumerate(order)}
    m = len(order)
    left = np.full(m, -1, dtype=np.int64)
    right = np.full(m, -1, dtype=np.int64)
    label = np.zeros(m, dtype=np.int64)
    for i, v in enumerate(order):
        if t.left[v] == -1:
            label[i] = t.label[v]
        else:
            left[i] = pos[t.left[v]]
            right[i] = pos[t.right[v]]
    return left, right, label


@numba.njit(cache=True)
def _fill(l1, r1, lab1, l2, r2, lab2):
    n1 = l1.shape[0]
    n2 = l2.shape[0]
    table = np.zeros((n1, n2), dtype=np.int32)
    for u in range(n1):
        u1 = l1[u]
        u2 = r1[u]
        for v in range(n2):
            v1 = l2[v]
            v2 = r2[v]
            if u1 == -1 and v1 == -1:
                table[u, v] = 1 if lab1[u] == lab2[v] else 0
                continue
            best = 0
            if u1 != -1 and v1 != -1:
                best = table[u1, v1] + table[u2, v2]
                x = table[u1, v2] + table[u2, v1]
                if x > best:
                    best = x
            if u1 != -1:
                if table[u1, v] > best:
                    best = table[u1, v]
                if table[u2, v] > best:
                    best = table[u2, v]
            if v1 != -1:
                if table[u, v1] > best:
                    best = table[u, v1]
                if table[u, v2] > best:
                    best = table[u, v2]
            table[u, v] = best
    return table


def _witness(table, l1, r1, lab1, l2, r2):
    """Backtrack the argmax choices; ties go to the first listed case."""
    out = []
    stack = [(table.shape[0] - 1, table.shape[1] - 1)]
    while stack:
        u, v = stack.pop()
        value = table[u, v]
        if value == 0:
            continue
        u1, u2, v1, v2 = l1[u], r1[u], l2[v], r2[v]
        if u1 == -1 and v1 == -1:
            out.append(int(lab1[u]))
            continue
        if u1 != -1 and v1 != -1:
            if table[u1, v1] + table[u2, v2] == value:
                stack.extend(((u1, v1), (u2, v2)))
                continue
            if table[u1, v2] + table[u2, v1] == value:
                stack.extend(((u1, v2), (u2, v1)))
                continue
        if u1 != -1:
            if table[u1, v] == value:
                stack.append((u1, v))
                continue
            if table[u2, v] == value:
                stack.append((u2, v))
                continue
        if table[u, v1] == value:
            stack.append((u, v1))
        else:
            stack.append((u, v2))
    return frozenset(out)


def mast(t1: Tree, t2: Tree) -> MastResult:
    """Exact MAST by the O(n^2) node-pair recurrence, with a witness set.

    ``M(u, v)`` is the largest agreement set between the subtrees at ``u``
    and ``v``; it is the best of matching the children crosswise or
    straight, or dropping down one side.
    """
    _check_same_labels(t1, t2)
    l1, r1, lab1 = _arrays(t1)
    l2, r2, lab2 = _arrays(t2)
    table = _fill(l1, r1, lab1, l2, r2, lab2)
    size = int(table[-1, -1])
    witness = _witness(table, l1, r1, lab1, l2, r2)
    return MastResult(size, witness)


def mast_size(t1: Tree, t2: Tree) -> int:
    _check_same_labels(t1, t2)
    l1, r1, lab1 = _arrays(t1)
    l2, r2, lab2 = _arrays(t2)
    return int(_fill(l1, r1, lab1, l2, r2, lab2)[-1, -1])


# -- exhaustive oracles ------------------------------------------------------

def _restricted_clusters(masks: tuple[int, ...], s: int) -> frozenset[int]:
    # a rooted tree on s is determined by its nonempty clusters C & s
    return frozenset(c & s for c in masks if c & s)


def _subsets_desc(t1: Tree, t2: Tree):
    _check_same_labels(t1, t2)
    n = t1.leaf_count
    if n > BRUTEFORCE_LIMIT:
        raise TreeError(f"n={n} exceeds the brute-force limit {BRUTEFORCE_LIMIT}")
    return sorted(t1.labels), t1.clade_masks, t2.clade_masks


def mast_bruteforce(t1: Tree, t2: Tree) -> MastResult:
    """MAST by scanning leaf subsets from largest to smallest."""
    labels, m1, m2 = _subsets_desc(t1, t2)
    n = len(labels)
    for size in range(n, 1, -1):
        for subset in combinations(labels, size):
            s = 0
            for l in subset:
                s |= 1 << l
            if _restricted_clusters(m1, s) == _restricted_clusters(m2, s):
                return MastResult(size, frozenset(subset))
    return MastResult(1, frozenset(labels[:1]))


def count_agreement_sets(t1: Tree, t2: Tree, s: int) -> int:
    """Number of size-``s`` leaf subsets on which the trees agree."""
    labels, m1, m2 = _subsets_desc(t1, t2)
    if not 2 <= s <= len(labels):
        raise TreeError(f"subset size {s} out of range")
    count = 0
    for subset in combinations(labels, s):
        mask = 0
        for l in subset:
            mask |= 1 << l
        if _restricted_clusters(m1, mask) == _restricted_clusters(m2, mask):
            count += 1
    return count
