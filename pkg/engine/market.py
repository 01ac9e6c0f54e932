# engine/market.py
"""Solvency cones, deferred solvency cones, arbitrage certification and liquidation."""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, Mapping, Optional, Sequence, Tuple

from .errors import ModelError, PreconditionError
from .lp import LpProblem, lp_solve
from .polyhedra import (
    Halfspace, Polyhedron, affine_rows, convert, intersect_all, minkowski_sum, subset,
)
from .tree import EventTree, PredictableProcess, restrict_to_subtree
from .vectors import Vector, fmt_vec, is_zero, sub, unit, vsum, zeros

logger = logging.getLogger(__name__)

RateMatrix = Tuple[Tuple[Fraction, ...], ...]


def validate_rates(tree: EventTree, rates: Mapping[str, Sequence[Sequence]]) -> Dict[str, RateMatrix]:
    """Checks π_t^{jk} > 0 with unit diagonal at every node."""
    out = {}
    d = tree.dim
    for node_id in tree.node_ids():
        if node_id not in rates:
            raise ModelError(f"no exchange rates at node '{node_id}'")
        m = tuple(tuple(Fraction(x) for x in row) for row in rates[node_id])
        if len(m) != d or any(len(row) != d for row in m):
            raise ModelError(f"rate matrix at '{node_id}' is not {d}x{d}")
        for j in range(d):
            if m[j][j] != 1:
                raise ModelError(f"rate matrix at '{node_id}' has diagonal entry {m[j][j]} != 1")
            for k in range(d):
                if m[j][k] <= 0:
                    raise ModelError(f"rate matrix at '{node_id}' has nonpositive entry at ({j + 1},{k + 1})")
        out[node_id] = m
    return out


def solvency_cone(pi: RateMatrix) -> Polyhedron:
    """Cone generated by e^j and π^{jk}e^j − e^k."""
    d = len(pi)
    gens = [unit(d, j) for j in range(d)]
    for j in range(d):
        for k in range(d):
            if j != k:
                gens.append(sub(tuple(pi[j][k] * x for x in unit(d, j)), unit(d, k)))
    return convert(Polyhedron.cone(d, gens))


def polar(cone: Polyhedron) -> Polyhedron:
    """{y : y·x >= 0 for all x in cone}; rows are the cone's generators, generators its normals."""
    if not cone.is_cone():
        raise PreconditionError(f"polar of a non-cone {cone.describe()}")
    d = cone.dim
    hs = [Halfspace(r, Fraction(0)) for r in cone.rays]
    return convert(Polyhedron(d, halfspaces=hs, points=[zeros(d)], rays=[h.normal for h in cone.halfspaces]))


@dataclass
class ConeField:
    """K_t and Q_t at every node, with polars computed on demand."""
    K: Dict[str, Polyhedron]
    Q: Dict[str, Polyhedron]
    _polars: Dict[Tuple[str, str], Polyhedron] = field(default_factory=dict)

    def K_star(self, node_id: str) -> Polyhedron:
        return self._polar("K", node_id)

    def Q_star(self, node_id: str) -> Polyhedron:
        return self._polar("Q", node_id)

    def _polar(self, which: str, node_id: str) -> Polyhedron:
        key = (which, node_id)
        if key not in self._polars:
            self._polars[key] = polar(getattr(self, which)[node_id])
        return self._polars[key]


def deferred_cones(tree: EventTree, rates: Mapping[str, RateMatrix]) -> ConeField:
    """Q_T = K_T; Q_t = (∩ children Q_{t+1}) + K_t."""
    K = {i: solvency_cone(rates[i]) for i in tree.node_ids()}
    Q: Dict[str, Polyhedron] = {}
    for node_id in tree.backward():
        if tree.is_leaf(node_id):
            Q[node_id] = K[node_id]
        else:
            common = intersect_all([Q[c] for c in tree.children(node_id)])
            Q[node_id] = minkowski_sum(common, K[node_id])
        logger.debug("Q at %s = %s", node_id, Q[node_id].describe())
    return ConeField(K=K, Q=Q)


class ArbitrageStatus(str, Enum):
    NO_ARBITRAGE = "no-arbitrage"
    ARBITRAGE = "arbitrage"


@dataclass(frozen=True)
class ArbitrageReport:
    """Exactly one of `certificate` (m per node) or `witness` (+ terminal surplus) is set."""
    status: ArbitrageStatus
    certificate: Optional[Dict[str, Vector]] = None
    witness: Optional[PredictableProcess] = None
    surplus: Optional[Dict[str, Vector]] = None

    @property
    def arbitrage_free(self) -> bool:
        return self.status is ArbitrageStatus.NO_ARBITRAGE


def check_no_arbitrage(tree: EventTree, cones: ConeField) -> ArbitrageReport:
    """Searches for an unnormalized consistent price system; on failure solves the alternative system."""
    d = tree.dim
    ids = tree.node_ids()
    index = {node_id: k * d for k, node_id in enumerate(ids)}
    n = len(ids) * d
    rows, eqs = [], []
    for node_id in ids:
        rows += affine_rows(cones.K_star(node_id), n, [(index[node_id], Fraction(1))])
        if tree.is_leaf(node_id):
            a = [Fraction(0)] * n
            a[index[node_id]:index[node_id] + d] = [Fraction(1)] * d
            rows.append((tuple(a), Fraction(1)))
        else:
            for j in range(d):
                a = [Fraction(0)] * n
                a[index[node_id] + j] = Fraction(1)
                for c in tree.children(node_id):
                    a[index[c] + j] -= 1
                eqs.append((tuple(a), Fraction(0)))
    sol = lp_solve(LpProblem(objective=zeros(n), rows=rows, equalities=eqs))
    if sol.optimal:
        m = {node_id: sol.point[index[node_id]:index[node_id] + d] for node_id in ids}
        logger.info("no-arbitrage certificate found")
        return ArbitrageReport(ArbitrageStatus.NO_ARBITRAGE, certificate=m)
    witness, surplus = _arbitrage_witness(tree, cones)
    logger.info("model admits arbitrage")
    return ArbitrageReport(ArbitrageStatus.ARBITRAGE, witness=witness, surplus=surplus)


def _arbitrage_witness(tree: EventTree, cones: ConeField) -> Tuple[PredictableProcess, Dict[str, Vector]]:
    """Farkas alternative written in strategy variables: y_0 = 0, self-financing, y_T − x ∈ K_T, x >= 0, Σx >= 1."""
    d = tree.dim
    inner = tree.non_leaves()
    leaves = tree.leaves()
    index = {node_id: k * d for k, node_id in enumerate(inner + leaves)}
    n = (len(inner) + len(leaves)) * d
    rows = []
    for node_id in tree.node_ids():
        terms = []
        parent = tree.parent(node_id)
        if parent is not None:
            terms.append((index[parent], Fraction(1)))
        terms.append((index[node_id], Fraction(-1)))
        rows += affine_rows(cones.K[node_id], n, terms)
    total = [Fraction(0)] * n
    for leaf in leaves:
        for j in range(d):
            a = [Fraction(0)] * n
            a[index[leaf] + j] = Fraction(1)
            rows.append((tuple(a), Fraction(0)))
            total[index[leaf] + j] = Fraction(1)
    rows.append((tuple(total), Fraction(1)))
    sol = lp_solve(LpProblem(objective=zeros(n), rows=rows))
    if not sol.optimal:
        raise ModelError("neither a consistent price system nor an arbitrage was found")
    y = {node_id: sol.point[index[node_id]:index[node_id] + d] for node_id in inner}
    x = {leaf: sol.point[index[leaf]:index[leaf] + d] for leaf in leaves}
    return PredictableProcess(initial=zeros(d), values=y), x


def certificate_holds(tree: EventTree, cones: ConeField, m: Mapping[str, Vector]) -> bool:
    """Re-checks cone membership, the tree-sum identity and leaf normalization exactly."""
    d = tree.dim
    for node_id in tree.node_ids():
        if not cones.K_star(node_id).contains(m[node_id]):
            return False
        if tree.is_leaf(node_id):
            if sum(m[node_id], Fraction(0)) < 1:
                return False
        elif m[node_id] != vsum((m[c] for c in tree.children(node_id)), d):
            return False
    return True


def witness_holds(tree: EventTree, cones: ConeField, y: PredictableProcess, x: Mapping[str, Vector]) -> bool:
    """The arbitrage definition: y_0 = 0, y_t − y_{t+1} ∈ K_t, y_T − x ∈ K_T, x >= 0 and x != 0."""
    if not is_zero(y.initial):
        return False
    for node_id in tree.node_ids():
        held = y.at(tree, node_id)
        nxt = x[node_id] if tree.is_leaf(node_id) else y.after(tree, node_id)
        if not cones.K[node_id].contains(sub(held, nxt)):
            return False
    surplus = [v for leaf in tree.leaves() for v in x[leaf]]
    return all(v >= 0 for v in surplus) and any(v > 0 for v in surplus)


def liquidation_strategy(tree: EventTree, cones: ConeField, node_id: str, x: Sequence[Fraction]) -> PredictableProcess:
    """Self-financing y_{t+1}, …, y_{T+1} = 0 on the subtree below node_id, starting from x ∈ Q_t."""
    x = tuple(Fraction(v) for v in x)
    d = tree.dim
    if not cones.Q[node_id].contains(x):
        raise PreconditionError(f"liquidation start {fmt_vec(x)} is not in Q at '{node_id}'")
    sub_tree = restrict_to_subtree(tree, node_id)
    inner = sub_tree.non_leaves()
    if cones.K[node_id].contains(x):
        return PredictableProcess(initial=x, values={i: zeros(d) for i in inner})
    index = {i: k * d for k, i in enumerate(inner)}
    n = len(inner) * d
    rows = affine_rows(cones.K[node_id], n, [(index[node_id], Fraction(-1))], const=x)
    for mu in sub_tree.node_ids():
        if mu == node_id:
            continue
        terms = [(index[sub_tree.parent(mu)], Fraction(1))]
        if not sub_tree.is_leaf(mu):
            terms.append((index[mu], Fraction(-1)))
        rows += affine_rows(cones.K[mu], n, terms)
    sol = lp_solve(LpProblem(objective=zeros(n), rows=rows))
    if not sol.optimal:
        raise PreconditionError(f"no liquidation strategy from {fmt_vec(x)} at '{node_id}'")
    y = PredictableProcess(initial=x, values={i: sol.point[index[i]:index[i] + d] for i in inner})
    if not liquidation_holds(sub_tree, cones, y):
        raise PreconditionError(f"liquidation strategy at '{node_id}' failed its re-check")
    return y


def liquidation_holds(sub_tree: EventTree, cones: ConeField, y: PredictableProcess) -> bool:
    return all(cones.K[mu].contains(sub(y.at(sub_tree, mu), y.after(sub_tree, mu)))
               for mu in sub_tree.node_ids())


def cone_monotone(smaller: ConeField, larger: ConeField) -> bool:
    """Node-wise K and Q inclusion between two cone fields on the same tree."""
    return all(subset(smaller.K[i], larger.K[i]) and subset(smaller.Q[i], larger.Q[i]) for i in smaller.K)
