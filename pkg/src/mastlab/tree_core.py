"""Rooted binary leaf-labeled trees.

Trees are stored as an index arena: node ``i`` is a leaf when
``left[i] == -1`` (its label is ``label[i]``), otherwise it is an internal
node with children ``left[i]`` and ``right[i]`` (``label[i] == 0``).
Trees are immutable; every operation returns a new tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

LeafSet = frozenset  # frozenset[int]

#: largest n accepted by :func:`enumerate_trees` (|RB(8)| = 135135)
ENUMERATION_LIMIT = 8


class TreeError(ValueError):
    """Invalid tree construction or operation argument."""


class NewickError(ValueError):
    """Malformed Newick input; ``position`` is the 0-based character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True, eq=False)
class Tree:
    left: tuple[int, ...]
    right: tuple[int, ...]
    label: tuple[int, ...]
    root: int

    def __post_init__(self):
        size = len(self.left)
        if not (len(self.right) == len(self.label) == size) or size == 0:
            raise TreeError("inconsistent node arrays")
        if not 0 <= self.root < size:
            raise TreeError("root out of range")
        parent = [-1] * size
        for v in range(size):
            a, b = self.left[v], self.right[v]
            if a == -1:
                if b != -1:
                    raise TreeError(f"node {v} has exactly one child")
                if self.label[v] <= 0:
                    raise TreeError(f"leaf {v} has non-positive label")
                continue
            for c in (a, b):
                if not 0 <= c < size or c == self.root or parent[c] != -1:
                    raise TreeError(f"node {c} has an invalid parent link")
                parent[c] = v
        reached = sum(1 for v in range(size) if parent[v] != -1) + 1
        if reached != size:
            raise TreeError("nodes unreachable from root")
        labels = [self.label[v] for v in range(size) if self.left[v] == -1]
        if len(set(labels)) != len(labels):
            raise TreeError("duplicate leaf labels")
        object.__setattr__(self, "_parent", tuple(parent))

    # -- derived structure -------------------------------------------------

    @property
    def parent(self) -> tuple[int, ...]:
        return self._parent

    @property
    def node_count(self) -> int:
        return len(self.left)

    def is_leaf(self, v: int) -> bool:
        return self.left[v] == -1

    def children(self, v: int) -> tuple[int, int] | tuple[()]:
        if self.left[v] == -1:
            return ()
        return self.left[v], self.right[v]

    @cached_property
    def postorder(self) -> tuple[int, ...]:
        order = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            order.append(v)
            if self.left[v] != -1:
                stack.append(self.left[v])
                stack.append(self.right[v])
        # reversed (node, right, left) preorder is a left-first postorder
        order.reverse()
        return tuple(order)

    @cached_property
    def leaf_count(self) -> int:
        return sum(1 for a in self.left if a == -1)

    @cached_property
    def labels(self) -> LeafSet:
        return frozenset(l for a, l in zip(self.left, self.label) if a == -1)

    @cached_property
    def leaf_node(self) -> dict[int, int]:
        """Map from leaf label to node id."""
        return {self.label[v]: v for v in range(self.node_count) if self.left[v] == -1}

    @cached_property
    def sizes(self) -> tuple[int, ...]:
        """Number of leaves below each node."""
        size = [0] * self.node_count
        for v in self.postorder:
            if self.left[v] == -1:
                size[v] = 1
            else:
                size[v] = size[self.left[v]] + size[self.right[v]]
        return tuple(size)

    @cached_property
    def min_labels(self) -> tuple[int, ...]:
        low = [0] * self.node_count
        for v in self.postorder:
            if self.left[v] == -1:
                low[v] = self.label[v]
            else:
                low[v] = min(low[self.left[v]], low[self.right[v]])
        return tuple(low)

    @cached_property
    def clade_masks(self) -> tuple[int, ...]:
        """Leaf set below each node as a bitmask (bit ``l`` for label ``l``)."""
        mask = [0] * self.node_count
        for v in self.postorder:
            if self.left[v] == -1:
                mask[v] = 1 << self.label[v]
            else:
                mask[v] = mask[self.left[v]] | mask[self.right[v]]
        return tuple(mask)

    @cached_property
    def newick(self) -> str:
        return write_newick(self)

    def __eq__(self, other):
        if not isinstance(other, Tree):
            return NotImplemented
        return self.newick == other.newick

    def __hash__(self):
        return hash(self.newick)

    def __repr__(self):
        return f"Tree({self.newick!r})"

    def __str__(self):
        return self.newick


class _Builder:
    """Mutable arena used while constructing a tree."""

    __slots__ = ("left", "right", "label")

    def __init__(self):
        self.left: list[int] = []
        self.right: list[int] = []
        self.label: list[int] = []

    def leaf(self, label: int) -> int:
        self.left.append(-1)
        self.right.append(-1)
        self.label.append(label)
        return len(self.left) - 1

    def join(self, a: int, b: int) -> int:
        self.left.append(a)
        self.right.append(b)
        self.label.append(0)
        return len(self.left) - 1

    def build(self, root: int) -> Tree:
        return Tree(tuple(self.left), tuple(self.right), tuple(self.label), root)


def leaf_tree(label: int) -> Tree:
    return Tree((-1,), (-1,), (label,), 0)


def from_nested(spec) -> Tree:
    """Build a tree from nested 2-tuples of ints, e.g. ``((1, 2), 3)``."""
    builder = _Builder()

    def walk(node):
        if isinstance(node, int):
            return builder.leaf(node)
        if len(node) != 2:
            raise TreeError(f"non-binary vertex {node!r}")
        return builder.join(walk(node[0]), walk(node[1]))

    return builder.build(walk(spec))


# -- Newick ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:([(),;])|([^\s(),;]+))")
_INTEGER = re.compile(r"[0-9]+")


def parse_newick(text: str) -> Tree:
    """Parse an integer-labeled rooted binary Newick string.

    The trailing ``;`` is optional. Branch lengths and internal node labels
    are rejected.
    """
    builder = _Builder()
    frames: list[list[int]] = []  # children collected for each open '('
    opened_at: list[int] = []
    seen: set[int] = set()
    root = None
    expect_subtree = True
    pos = 0
    end = len(text)
    while pos < end:
        m = _TOKEN.match(text, pos)
        if m is None:
            # only trailing whitespace remains
            break
        start = m.start(1) if m.group(1) else m.start(2)
        pos = m.end()
        punct, word = m.group(1), m.group(2)
        if root is not None:
            if punct == ";":
                tail = text[pos:]
                if tail.strip():
                    raise NewickError("unexpected text after ';'", pos + len(tail) - len(tail.lstrip()))
                break
            raise NewickError("unexpected token after complete tree", start)
        if punct == "(":
            if not expect_subtree:
                raise NewickError("unexpected '('", start)
            frames.append([])
            opened_at.append(start)
            continue
        if word is not None:
            if not expect_subtree:
                if text[start] == ":" or ":" in word:
                    raise NewickError("branch lengths are not supported", start)
                raise NewickError("internal node labels are not supported", start)
            if not _INTEGER.fullmatch(word):
                raise NewickError(f"leaf label {word!r} is not a positive integer", start)
            value = int(word)
            if value <= 0:
                raise NewickError(f"leaf label {word!r} is not a positive integer", start)
            if value in seen:
                raise NewickError(f"duplicate leaf label {value}", start)
            seen.add(value)
            node = builder.leaf(value)
        elif punct == ",":
            if expect_subtree or not frames:
                raise NewickError("unexpected ','", start)
            if len(frames[-1]) >= 2:
                raise NewickError("vertex has more than two children", start)
            expect_subtree = True
            continue
        elif punct == ")":
            if expect_subtree or not frames:
                raise NewickError("unexpected ')'", start)
            kids = frames.pop()
            opened_at.pop()
            if len(kids) != 2:
                raise NewickError("vertex does not have exactly two children", start)
            node = builder.join(kids[0], kids[1])
        else:  # ';'
            raise NewickError("unexpected ';'", start)
        expect_subtree = False
        if frames:
            frames[-1].append(node)
        else:
            root = node
    if root is None:
        if frames:
            raise NewickError("unbalanced '('", opened_at[-1])
        raise NewickError("empty tree", end)
    return builder.build(root)


def write_newick(t: Tree) -> str:
    """Canonical Newick: the child with the smaller minimum label comes first."""
    low = t.min_labels
    parts: list[str] = []
    stack: list[int | str] = [t.root]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            parts.append(item)
            continue
        if t.left[item] == -1:
            parts.append(str(t.label[item]))
            continue
        a, b = t.left[item], t.right[item]
        if low[b] < low[a]:
            a, b = b, a
        stack.extend((")", b, ",", a))
        parts.append("(")
    parts.append(";")
    return "".join(parts)


# -- structural operations ---------------------------------------------------

def clade_leafset(t: Tree, v: int) -> LeafSet:
    """Labels of the leaves below node ``v``."""
    if not 0 <= v < t.node_count:
        raise TreeError(f"invalid node id {v}")
    out = []
    stack = [v]
    while stack:
        u = stack.pop()
        if t.left[u] == -1:
            out.append(t.label[u])
        else:
            stack.append(t.left[u])
            stack.append(t.right[u])
    return frozenset(out)


def restrict(t: Tree, s: Iterable[int]) -> Tree:
    """The binary restriction tree ``t|s``, rooted at the MRCA of ``s``."""
    keep = frozenset(s)
    if not keep:
        raise TreeError("cannot restrict to an empty leaf set")
    missing = keep - t.labels
    if missing:
        raise TreeError(f"labels not in tree: {sorted(missing)}")
    builder = _Builder()
    image = [-1] * t.node_count  # new node id, or -1 when nothing survives
    for v in t.postorder:
        if t.left[v] == -1:
            if t.label[v] in keep:
                image[v] = builder.leaf(t.label[v])
        else:
            a, b = image[t.left[v]], image[t.right[v]]
            if a != -1 and b != -1:
                image[v] = builder.join(a, b)
            else:
                image[v] = a if a != -1 else b
    return builder.build(image[t.root])


def relabel(t: Tree, mapping) -> Tree:
    """Apply ``mapping`` (dict or callable) to every leaf label."""
    get = mapping.__getitem__ if hasattr(mapping, "__getitem__") else mapping
    label = tuple(get(l) if a == -1 else 0 for a, l in zip(t.left, t.label))
    return Tree(t.left, t.right, label, t.root)


def shape_code(t: Tree) -> bytes:
    """Canonical encoding of the unlabeled shape of ``t``.

    A leaf is ``.``; an internal node is ``(`` + both child codes in sorted
    order + ``)``.
    """
    return node_shape_codes(t)[t.root]


def node_shape_codes(t: Tree) -> list[bytes]:
    code: list[bytes] = [b""] * t.node_count
    for v in t.postorder:
        if t.left[v] == -1:
            code[v] = b"."
        else:
            a, b = code[t.left[v]], code[t.right[v]]
            if b < a:
                a, b = b, a
            code[v] = b"(" + a + b + b")"
    return code


def shape_isomorphism(t1: Tree, t2: Tree) -> list[int]:
    """Node map ``phi`` with ``phi[v]`` the node of ``t2`` matching ``v`` in ``t1``.

    Children are paired by shape code; equal codes keep arena order, so two
    relabelings of one arena map node-for-node. Labels are never consulted.
    """
    c1, c2 = node_shape_codes(t1), node_shape_codes(t2)
    if c1[t1.root] != c2[t2.root]:
        raise TreeError("trees have different shapes")
    phi = [-1] * t1.node_count
    stack = [(t1.root, t2.root)]
    while stack:
        u, v = stack.pop()
        phi[u] = v
        if t1.left[u] == -1:
            continue
        ua, ub = t1.left[u], t1.right[u]
        va, vb = t2.left[v], t2.right[v]
        if c1[ub] < c1[ua]:
            ua, ub = ub, ua
        if c2[vb] < c2[va]:
            va, vb = vb, va
        stack.append((ua, va))
        stack.append((ub, vb))
    return phi


def enumerate_trees(n: int) -> Iterator[Tree]:
    """Every tree of RB(n) exactly once, by sequential leaf insertion.

    Leaf ``i`` (for i = 2..n) is attached above each existing node in
    increasing node-id order; attaching above the root creates a new root.
    Leaf 1 starts as the single node 0.
    """
    if n < 1:
        raise TreeError("n must be at least 1")
    if n > ENUMERATION_LIMIT:
        raise TreeError(f"n={n} exceeds the enumeration limit {ENUMERATION_LIMIT}")
    left, right, label, parent = [-1], [-1], [1], [-1]

    def insert(i: int, root: int):
        if i > n:
            yield Tree(tuple(left), tuple(right), tuple(label), root)
            return
        for x in range(len(left)):
            new_root, undo = _attach(left, right, label, parent, x, i, root)
            yield from insert(i + 1, new_root)
            undo()

    yield from insert(2, 0)


def _attach(left, right, label, parent, x, new_label, root):
    """Subdivide the edge above ``x`` with a new cherry partner ``new_label``."""
    leaf = len(left)
    left.append(-1)
    right.append(-1)
    label.append(new_label)
    parent.append(-1)
    joint = len(left)
    p = parent[x]
    left.append(x)
    right.append(leaf)
    label.append(0)
    parent.append(p)
    parent[x] = joint
    parent[leaf] = joint
    if p != -1:
        if left[p] == x:
            left[p] = joint
        else:
            right[p] = joint
    new_root = joint if p == -1 else root

    def undo():
        if p != -1:
            if left[p] == joint:
                left[p] = x
            else:
                right[p] = x
        parent[x] = p
        for arr in (left, right, label, parent):
            del arr[-2:]

    return new_root, undo


def trees_by_shape(trees: Sequence[Tree]) -> dict[bytes, list[Tree]]:
    groups: dict[bytes, list[Tree]] = {}
    for t in trees:
        groups.setdefault(shape_code(t), []).append(t)
    return groups
