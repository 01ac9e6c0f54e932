# engine/tree.py
"""Finite event trees and the processes that live on them."""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

from .errors import ModelError
from .vectors import Vector, zeros

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Node:
    id: str
    time: int
    parent: Optional[str]
    prob: Fraction


@dataclass(frozen=True)
class NodeEntry:
    """One row of a model description, before validation."""
    id: str
    time: int
    parent: Optional[str]
    branch_prob: Fraction = Fraction(1)


class EventTree:
    """A validated scenario tree; node order is lexicographic by id wherever it matters."""

    def __init__(self, nodes: Mapping[str, Node], dim: int):
        self.dim = dim
        self._nodes = dict(nodes)
        self._children: Dict[str, List[str]] = {i: [] for i in self._nodes}
        root = None
        for n in self._nodes.values():
            if n.parent is None:
                root = n.id
            else:
                self._children[n.parent].append(n.id)
        for kids in self._children.values():
            kids.sort()
        self.root = root
        self.horizon = max(n.time for n in self._nodes.values()) - self._nodes[root].time
        self.start = self._nodes[root].time

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def node(self, node_id: str) -> Node:
        return self._nodes[node_id]

    def time(self, node_id: str) -> int:
        return self._nodes[node_id].time - self.start

    def parent(self, node_id: str) -> Optional[str]:
        return self._nodes[node_id].parent

    def children(self, node_id: str) -> List[str]:
        return self._children[node_id]

    def is_leaf(self, node_id: str) -> bool:
        return not self._children[node_id]

    def node_ids(self) -> List[str]:
        return sorted(self._nodes)

    def leaves(self) -> List[str]:
        return sorted(i for i in self._nodes if not self._children[i])

    def non_leaves(self) -> List[str]:
        return sorted(i for i in self._nodes if self._children[i])

    def atoms(self, t: int) -> List[str]:
        if not 0 <= t <= self.horizon:
            raise ModelError(f"time {t} outside [0, {self.horizon}]")
        return sorted(i for i in self._nodes if self.time(i) == t)

    def backward(self) -> List[str]:
        """All nodes, latest time first."""
        return [i for t in range(self.horizon, -1, -1) for i in self.atoms(t)]

    def path(self, node_id: str) -> List[str]:
        """Root-to-node list of ids."""
        out = [node_id]
        while self._nodes[out[-1]].parent is not None and out[-1] != self.root:
            out.append(self._nodes[out[-1]].parent)
        return out[::-1]

    def descendants(self, node_id: str) -> List[str]:
        """The node itself and every node below it, in breadth-first order."""
        out, frontier = [], [node_id]
        while frontier:
            out.extend(frontier)
            frontier = [c for n in frontier for c in self._children[n]]
        return out

    def prob(self, node_id: str) -> Fraction:
        return self._nodes[node_id].prob


def build_tree(entries: Iterable[NodeEntry], dim: int) -> EventTree:
    """Validates a list of node rows and assembles the tree."""
    entries = list(entries)
    if dim < 2:
        raise ModelError(f"dimension must be at least 2, got {dim}")
    by_id: Dict[str, NodeEntry] = {}
    for e in entries:
        if e.id in by_id:
            raise ModelError(f"duplicate node id '{e.id}'")
        by_id[e.id] = e
    roots = [e for e in entries if e.parent is None]
    if len(roots) != 1 or roots[0].time != 0:
        raise ModelError("exactly one root node at time 0 is required")
    for e in entries:
        if e.parent is None:
            continue
        if e.parent not in by_id:
            raise ModelError(f"node '{e.id}' has dangling parent '{e.parent}'")
        if by_id[e.parent].time != e.time - 1:
            raise ModelError(f"node '{e.id}' at time {e.time} has parent at time {by_id[e.parent].time}")
        if Fraction(e.branch_prob) <= 0:
            raise ModelError(f"node '{e.id}' has nonpositive branch probability")
    horizon = max(e.time for e in entries)
    if horizon < 1:
        raise ModelError("horizon must be at least 1")

    children: Dict[str, List[NodeEntry]] = {e.id: [] for e in entries}
    for e in entries:
        if e.parent is not None:
            children[e.parent].append(e)
    for e in entries:
        kids = children[e.id]
        if e.time < horizon and not kids:
            raise ModelError(f"node '{e.id}' at time {e.time} < {horizon} has no children")
        if kids and sum((Fraction(k.branch_prob) for k in kids), Fraction(0)) != 1:
            raise ModelError(f"branch probabilities below '{e.id}' do not sum to 1")

    nodes: Dict[str, Node] = {}
    frontier = [roots[0]]
    nodes[roots[0].id] = Node(roots[0].id, 0, None, Fraction(1))
    while frontier:
        nxt = []
        for e in frontier:
            for k in children[e.id]:
                nodes[k.id] = Node(k.id, k.time, e.id, nodes[e.id].prob * Fraction(k.branch_prob))
                nxt.append(k)
        frontier = nxt
    logger.debug("built tree: %d nodes, horizon %d, dimension %d", len(nodes), horizon, dim)
    return EventTree(nodes, dim)


def restrict_to_subtree(tree: EventTree, node_id: str) -> EventTree:
    """Subtree rooted at node_id; probabilities renormalized, times restart at 0."""
    base = tree.node(node_id)
    nodes = {}
    for i in tree.descendants(node_id):
        n = tree.node(i)
        nodes[i] = Node(i, n.time - base.time, None if i == node_id else n.parent, n.prob / base.prob)
    return EventTree(nodes, tree.dim)


@dataclass(frozen=True)
class AdaptedProcess:
    """One vector per node."""
    values: Mapping[str, Vector]

    def __getitem__(self, node_id: str) -> Vector:
        return self.values[node_id]


@dataclass(frozen=True)
class PredictableProcess:
    """y_0 plus, at each non-leaf node, the portfolio held into its children.

    `at(tree, ν)` is y_t for ν at time t; `after(tree, ν)` is y_{t+1}, which
    is zero at leaves (y_{T+1} = 0).
    """
    initial: Vector
    values: Mapping[str, Vector] = field(default_factory=dict)

    def at(self, tree: EventTree, node_id: str) -> Vector:
        if node_id == tree.root:
            return self.initial
        return self.values[tree.parent(node_id)]

    def after(self, tree: EventTree, node_id: str) -> Vector:
        if tree.is_leaf(node_id):
            return zeros(len(self.initial))
        return self.values[node_id]


def process_from_rows(tree: EventTree, rows: Mapping[str, Sequence]) -> AdaptedProcess:
    missing = [i for i in tree.node_ids() if i not in rows]
    if missing:
        raise ModelError(f"process has no value at nodes {missing}")
    return AdaptedProcess({i: tuple(Fraction(x) for x in rows[i]) for i in tree.node_ids()})
