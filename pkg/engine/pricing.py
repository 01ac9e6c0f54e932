# engine/pricing.py
"""Backward set constructions for the seller and the buyer, and the resulting prices."""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Optional

from .errors import ArbitrageError
from .lp import LpStatus
from .market import ConeField
from .polyhedra import (
    Polyhedron, hull_union, intersect, intersect_all, min_along_axis, minkowski_sum, translate,
)
from .stopping import GamePayoffs
from .tree import EventTree
from .vectors import fmt, neg

logger = logging.getLogger(__name__)


class Side(str, Enum):
    SELLER = "seller"
    BUYER = "buyer"


@dataclass(frozen=True)
class NodeSets:
    """Y, X, W, V and Z at one node; VX = V ∩ X is kept for the buyer."""
    Y: Polyhedron
    X: Polyhedron
    W: Polyhedron
    V: Polyhedron
    Z: Polyhedron
    conv: Optional[Polyhedron] = None
    VX: Optional[Polyhedron] = None


@dataclass(frozen=True)
class SetLadder:
    side: Side
    sets: Dict[str, NodeSets]
    root: str

    def __getitem__(self, node_id: str) -> NodeSets:
        return self.sets[node_id]

    @property
    def Z0(self) -> Polyhedron:
        return self.sets[self.root].Z


def _children_meet(tree: EventTree, Z: Dict[str, Polyhedron], node_id: str) -> Polyhedron:
    W = intersect_all([Z[c] for c in tree.children(node_id)])
    if W.is_empty():
        raise ArbitrageError(f"empty intersection of successor sets at '{node_id}'; run the arbitrage check")
    return W


def seller_ladder(tree: EventTree, cones: ConeField, payoffs: GamePayoffs) -> SetLadder:
    """Z_T = Y_T + Q_T; W_t = ∩ children Z_{t+1}, V_t = W_t + Q_t, Z_t = conv{V_t, X_t + Q_t} ∩ (Y_t + Q_t)."""
    sets: Dict[str, NodeSets] = {}
    Z: Dict[str, Polyhedron] = {}
    for node_id in tree.backward():
        Q = cones.Q[node_id]
        Ya = translate(Q, payoffs.Y[node_id])
        Xa = translate(Q, payoffs.X[node_id])
        if tree.is_leaf(node_id):
            full = Polyhedron.full(tree.dim)
            sets[node_id] = NodeSets(Y=Ya, X=Xa, W=full, V=full, Z=Ya)
        else:
            W = _children_meet(tree, Z, node_id)
            V = minkowski_sum(W, Q)
            conv = hull_union(V, Xa)
            z = intersect(conv, Ya)
            if z.is_empty():
                raise ArbitrageError(f"empty seller set at '{node_id}'; run the arbitrage check")
            sets[node_id] = NodeSets(Y=Ya, X=Xa, W=W, V=V, Z=z, conv=conv)
        Z[node_id] = sets[node_id].Z
        logger.debug("seller Z at %s = %s", node_id, Z[node_id].describe())
    logger.info("seller ladder built over %d nodes", len(sets))
    return SetLadder(Side.SELLER, sets, tree.root)


def buyer_ladder(tree: EventTree, cones: ConeField, payoffs: GamePayoffs) -> SetLadder:
    """Z_T = −Y_T + Q_T; Z_t = conv{V_t ∩ (−X_t + Q_t), −Y_t + Q_t}, hull and intersection swapped."""
    sets: Dict[str, NodeSets] = {}
    Z: Dict[str, Polyhedron] = {}
    for node_id in tree.backward():
        Q = cones.Q[node_id]
        Yb = translate(Q, neg(payoffs.Y[node_id]))
        Xb = translate(Q, neg(payoffs.X[node_id]))
        if tree.is_leaf(node_id):
            full = Polyhedron.full(tree.dim)
            sets[node_id] = NodeSets(Y=Yb, X=Xb, W=full, V=full, Z=Yb, VX=Xb)
        else:
            W = _children_meet(tree, Z, node_id)
            V = minkowski_sum(W, Q)
            VX = intersect(V, Xb)
            z = hull_union(VX, Yb)
            sets[node_id] = NodeSets(Y=Yb, X=Xb, W=W, V=V, Z=z, conv=z, VX=VX)
        Z[node_id] = sets[node_id].Z
        logger.debug("buyer Z at %s = %s", node_id, Z[node_id].describe())
    logger.info("buyer ladder built over %d nodes", len(sets))
    return SetLadder(Side.BUYER, sets, tree.root)


def build_ladder(tree: EventTree, cones: ConeField, payoffs: GamePayoffs, side: Side) -> SetLadder:
    if side is Side.SELLER:
        return seller_ladder(tree, cones, payoffs)
    return buyer_ladder(tree, cones, payoffs)


def _axis_minimum(ladder: SetLadder, j: int) -> Fraction:
    sol = min_along_axis(ladder.Z0, j)
    if sol.status is LpStatus.UNBOUNDED:
        raise ArbitrageError(f"{ladder.side.value} price in currency {j + 1} is unbounded")
    if sol.status is LpStatus.INFEASIBLE:
        raise ArbitrageError(f"no {ladder.side.value} position in currency {j + 1} alone")
    return sol.value


def ask_price(ladder: SetLadder, j: int) -> Fraction:
    """min{x : x e^j ∈ Z_0} for the seller; j counts currencies from 0."""
    price = _axis_minimum(ladder, j)
    logger.info("ask in currency %d = %s", j + 1, fmt(price))
    return price


def bid_price(ladder: SetLadder, j: int) -> Fraction:
    """−min{x : x e^j ∈ Z_0} for the buyer; j counts currencies from 0."""
    price = -_axis_minimum(ladder, j)
    logger.info("bid in currency %d = %s", j + 1, fmt(price))
    return price
