"""Greedy k-blobification, scaffold trees, and the greedy comb scaffold.

A *cherry blob* is the full clade below a vertex; an *edge blob* is a
difference ``C1 - C2`` of two nested clades. The greedy procedure first
takes every containment-minimal clade whose size lies in ``[k, 2k-2]``.
Those cherry blobs span the prescaffold. Leaves outside them hang off the
prescaffold edges in small pendant subtrees (each smaller than ``k``), which
are grouped bottom-up along each edge into edge blobs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

from .tree_core import LeafSet, Tree, TreeError, clade_leafset, restrict, shape_isomorphism


@dataclass(frozen=True)
class Blob:
    """A blob with the vertices that define it.

    ``anchor`` is the clade vertex for a cherry blob. For an edge blob it is
    ``(outer, inner)`` with ``leaves == clade(outer) - clade(inner)``.
    """

    kind: Literal["cherry", "edge"]
    leaves: LeafSet
    anchor: int | tuple[int, int]

    def __len__(self):
        return len(self.leaves)


@dataclass(frozen=True)
class Blobification:
    k: int
    blobs: tuple[Blob, ...]
    cherry_count: int
    edge_count: int
    # scaffold leaf labelled i + 1 stands for blob i; None when there are no blobs
    scaffold: Tree | None
    prescaffold: Tree | None
    root_edge: bool
    # lower endpoint vertex of each prescaffold edge -> leaves left unblobbed on it
    leftovers: dict[int, LeafSet] = field(default_factory=dict)

    def __len__(self):
        return len(self.blobs)

    @property
    def blob_to_scaffold(self) -> dict[int, int]:
        if self.scaffold is None:
            return {}
        node = self.scaffold.leaf_node
        return {i: node[i + 1] for i in range(len(self.blobs))}

    def report(self) -> str:
        """Tab-separated text form used by the ``blobify`` command."""
        lines = [f"k\t{self.k}", f"cherry_blobs\t{self.cherry_count}",
                 f"edge_blobs\t{self.edge_count}",
                 f"root_edge\t{int(self.root_edge)}",
                 f"scaffold\t{self.scaffold.newick if self.scaffold else '-'}"]
        for i, blob in enumerate(self.blobs):
            leaves = ",".join(map(str, sorted(blob.leaves)))
            lines.append(f"blob\t{i + 1}\t{blob.kind}\t{leaves}")
        for edge in sorted(self.leftovers):
            leaves = ",".join(map(str, sorted(self.leftovers[edge]))) or "-"
            lines.append(f"leftover\t{edge}\t{leaves}")
        return "\n".join(lines) + "\n"


def _minimal_cherries(t: Tree, k: int) -> list[int]:
    sizes = t.sizes
    upper = 2 * k - 2
    chosen = []
    below = [False] * t.node_count  # an accepted clade lies at or below v
    for v in t.postorder:
        covered = t.left[v] != -1 and (below[t.left[v]] or below[t.right[v]])
        if not covered and k <= sizes[v] <= upper:
            chosen.append(v)
            covered = True
        below[v] = covered
    return chosen


def greedy_blobification(t: Tree, k: int) -> Blobification:
    """The greedy k-blobification of ``t``.

    Edge blobs never cross a prescaffold junction; on each edge they are
    closed as soon as the accumulated pendant leaves reach ``k``.
    """
    if k < 2:
        raise TreeError("k must be at least 2")
    cherries = _minimal_cherries(t, k)
    if not cherries:
        return Blobification(k, (), 0, 0, None, None, False,
                             {t.root: t.labels})
    parent = t.parent
    has_blob = [False] * t.node_count
    for v in cherries:
        has_blob[v] = True
    for v in t.postorder:
        if t.left[v] != -1 and (has_blob[t.left[v]] or has_blob[t.right[v]]):
            has_blob[v] = True
    cherry_set = set(cherries)
    junctions = {v for v in range(t.node_count)
                 if t.left[v] != -1 and has_blob[t.left[v]] and has_blob[t.right[v]]}
    tops = cherry_set | junctions
    # MRCA of all cherry blobs: the highest prescaffold vertex
    top = t.root
    while top not in tops:
        a = t.left[top]
        top = a if has_blob[a] else t.right[top]

    blobs = [Blob("cherry", clade_leafset(t, v), v) for v in cherries]
    edges = []
    leftovers: dict[int, LeafSet] = {}
    rank = {v: i for i, v in enumerate(t.postorder)}
    for lower in sorted(tops, key=rank.__getitem__):
        acc: list[int] = []
        inner = lower
        below = lower
        p = parent[lower]
        while p != -1 and p not in tops:
            sib = t.left[p] if t.right[p] == below else t.right[p]
            acc.extend(clade_leafset(t, sib))
            if len(acc) >= k:
                edges.append(Blob("edge", frozenset(acc), (p, inner)))
                acc = []
                inner = p
            below = p
            p = parent[p]
        leftovers[lower] = frozenset(acc)
    blobs.extend(edges)

    prescaffold = _induced_shape(t, [b.leaves for b in blobs[:len(cherries)]])
    scaffold = _induced_shape(t, [b.leaves for b in blobs])
    return Blobification(
        k=k,
        blobs=tuple(blobs),
        cherry_count=len(cherries),
        edge_count=len(edges),
        scaffold=scaffold,
        prescaffold=prescaffold,
        root_edge=top != t.root,
        leftovers=leftovers,
    )


def _induced_shape(t: Tree, groups: list[LeafSet]) -> Tree:
    """``t`` restricted to one representative per group, group i labelled i + 1."""
    rep = {min(g): i + 1 for i, g in enumerate(groups)}
    sub = restrict(t, rep)
    label = tuple(rep[l] if a == -1 else 0 for a, l in zip(sub.left, sub.label))
    return Tree(sub.left, sub.right, label, sub.root)


class Verification:
    """Truthy iff no problems were found; ``reasons`` lists them otherwise."""

    def __init__(self, reasons: list[str]):
        self.reasons = reasons

    def __bool__(self):
        return not self.reasons

    def __repr__(self):
        return f"Verification(ok={not self.reasons}, reasons={self.reasons!r})"


def _is_ancestor(t: Tree, a: int, b: int) -> bool:
    while b != -1:
        if b == a:
            return True
        b = t.parent[b]
    return False


def verify_blobification(t: Tree, b: Blobification) -> Verification:
    """Check every blobification invariant of ``b`` against ``t``."""
    reasons = []
    k = b.k
    seen: set[int] = set()
    for i, blob in enumerate(b.blobs):
        size = len(blob.leaves)
        if not k <= size <= 2 * k - 2:
            reasons.append(f"blob {i} has size {size} outside [{k}, {2 * k - 2}]")
        if seen & blob.leaves:
            reasons.append(f"blob {i} overlaps an earlier blob")
        seen |= blob.leaves
        if blob.kind == "cherry":
            if not isinstance(blob.anchor, int) or blob.leaves != clade_leafset(t, blob.anchor):
                reasons.append(f"cherry blob {i} is not the clade of its anchor")
        elif blob.kind == "edge":
            outer, inner = blob.anchor
            if outer == inner or not _is_ancestor(t, outer, inner):
                reasons.append(f"edge blob {i} anchors are not nested clades")
            elif blob.leaves != clade_leafset(t, outer) - clade_leafset(t, inner):
                reasons.append(f"edge blob {i} is not C1 minus C2 of its anchors")
        else:
            reasons.append(f"blob {i} has unknown kind {blob.kind!r}")
    cherries = sum(1 for x in b.blobs if x.kind == "cherry")
    if (cherries, len(b.blobs) - cherries) != (b.cherry_count, b.edge_count):
        reasons.append("blob counts do not match the blob list")
    if b.blobs:
        if b.scaffold is None:
            reasons.append("missing scaffold")
        elif b.scaffold.labels != frozenset(range(1, len(b.blobs) + 1)):
            reasons.append("scaffold leaves are not in bijection with blobs")
        else:
            expected = _induced_shape(t, [x.leaves for x in b.blobs])
            if expected != b.scaffold:
                reasons.append("scaffold is not the tree induced by the blobs")
    left = set()
    for edge, leaves in b.leftovers.items():
        if len(leaves) > k - 1:
            reasons.append(f"edge {edge} has {len(leaves)} leftover leaves (> {k - 1})")
        if leaves & seen or leaves & left:
            reasons.append(f"leftovers on edge {edge} overlap other leaves")
        left |= leaves
    if seen | left != t.labels:
        reasons.append("blobs and leftovers do not cover the leaf set")
    return Verification(reasons)


def matched_blob_agreement(t1: Tree, t2: Tree, k: int) -> LeafSet:
    """Agreement set built from matched blobs of two same-shape trees.

    Both trees are blobified and their blobs paired through a shape
    isomorphism. Every pair that shares a leaf contributes its smallest
    shared label.
    """
    phi = shape_isomorphism(t1, t2)  # raises on differing shapes
    b1 = greedy_blobification(t1, k)
    b2 = greedy_blobification(t2, k)
    return frozenset(min(x) for x in _matched_intersections(phi, b1, b2) if x)


def matched_intersections(t1: Tree, t2: Tree, k: int) -> list[LeafSet]:
    """``B1i & B2i`` for every aligned blob index ``i``."""
    phi = shape_isomorphism(t1, t2)
    return _matched_intersections(phi, greedy_blobification(t1, k), greedy_blobification(t2, k))


def _matched_intersections(phi, b1: Blobification, b2: Blobification) -> list[LeafSet]:
    index = {blob.anchor: blob for blob in b2.blobs}
    out = []
    for blob in b1.blobs:
        if blob.kind == "cherry":
            key = phi[blob.anchor]
        else:
            key = (phi[blob.anchor[0]], phi[blob.anchor[1]])
        out.append(blob.leaves & index[key].leaves)
    return out


# -- greedy comb scaffold ----------------------------------------------------

def greedy_comb_scaffold(t: Tree, k: int) -> list[int]:
    """Blob sizes along the heavy spine, folded from the bottom.

    Walk down from the root, always into the larger child (the left one on
    ties), recording the smaller child's leaf count. Then fold those counts
    from the deepest end: start a new blob once the current one has ``k``
    leaves, otherwise add to it.
    """
    sizes = t.sizes
    u = []
    v_node = t.root
    while t.left[v_node] != -1:
        a, b = t.left[v_node], t.right[v_node]
        u.append(min(sizes[a], sizes[b]))
        v_node = a if sizes[a] >= sizes[b] else b
    v = [0]
    while u:
        if v[-1] >= k:
            v.append(u[-1])
        else:
            v[-1] += u[-1]
        u.pop()
    return v


def comb_leaf_count(v: list[int], k: int) -> tuple[int, int]:
    """``(len(v), number of entries >= k)`` for a comb vector."""
    full = len(v)
    return full, full if v[-1] >= k else full - 1
