# engine/dual.py
"""Dual price representations checked by exact LPs over stopping-time grids.

A dual pair is held in unnormalized form m_t(ν) = q(ν)·S_t(ν). Prices in
currency j use S^j ≡ 1, so m^j is a probability tree: m^j at a node equals
the sum over its children and m_0^j = 1.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

from . import config
from .errors import ArbitrageError
from .lp import LpProblem, lp_solve
from .market import ConeField
from .polyhedra import affine_rows
from .pricing import Side
from .stopping import GamePayoffs, MixedStoppingTime, mst_grid, q_buyer_process, q_seller_process
from .tree import AdaptedProcess, EventTree
from .vectors import Vector, dot, fmt, mul, vsum

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DualPair:
    """m per node, the stopping time it is feasible for, and its objective value."""
    m: Dict[str, Vector]
    j: int
    stopping: MixedStoppingTime
    value: Fraction
    outer: Optional[MixedStoppingTime] = None


@dataclass(frozen=True)
class DualEntry:
    outer: MixedStoppingTime
    inner: MixedStoppingTime
    value: Fraction


@dataclass
class DualReport:
    side: Side
    grid: int
    j: int
    entries: List[DualEntry] = field(default_factory=list)
    best: Dict[tuple, DualPair] = field(default_factory=dict)
    value: Optional[Fraction] = None
    argument: Optional[MixedStoppingTime] = None
    primal: Optional[Fraction] = None

    @property
    def gap(self) -> Optional[Fraction]:
        if self.primal is None or self.value is None:
            return None
        return abs(self.primal - self.value)

    def inner_values(self, outer: MixedStoppingTime) -> List[Fraction]:
        return [e.value for e in self.entries if e.outer.key() == outer.key()]


def _layout(tree: EventTree) -> Tuple[Dict[str, int], int]:
    ids = tree.node_ids()
    return {node_id: k * tree.dim for k, node_id in enumerate(ids)}, len(ids) * tree.dim


def _constraints(tree: EventTree, cones: ConeField, rho: MixedStoppingTime, j: int):
    """Rows for m_t ∈ Q_t*, Σ_{later μ below ν} ρ(μ) m(μ) ∈ Q_t*(ν), and the probability tree in currency j."""
    index, n = _layout(tree)
    rows, eqs = [], []
    for node_id in tree.node_ids():
        Qs = cones.Q_star(node_id)
        rows += affine_rows(Qs, n, [(index[node_id], Fraction(1))])
        if tree.is_leaf(node_id):
            continue
        later = [(index[mu], rho[mu]) for mu in tree.descendants(node_id)[1:] if rho[mu]]
        if later:
            rows += affine_rows(Qs, n, later)
        a = [Fraction(0)] * n
        a[index[node_id] + j] = Fraction(1)
        for c in tree.children(node_id):
            a[index[c] + j] -= 1
        eqs.append((tuple(a), Fraction(0)))
    a = [Fraction(0)] * n
    a[index[tree.root] + j] = Fraction(1)
    eqs.append((tuple(a), Fraction(1)))
    return index, n, rows, eqs


def dual_lp(tree: EventTree, cones: ConeField, Z: AdaptedProcess, rho: MixedStoppingTime,
            j: int, sense: str) -> Optional[DualPair]:
    """Extremum of Σ ρ_t(ν) Z_t(ν)·m_t(ν) over the dual set for ρ; None when that set is empty."""
    index, n, rows, eqs = _constraints(tree, cones, rho, j)
    c = [Fraction(0)] * n
    for node_id in tree.node_ids():
        if rho[node_id]:
            for k, z in enumerate(Z[node_id]):
                c[index[node_id] + k] = rho[node_id] * z
    sol = lp_solve(LpProblem(objective=tuple(c), rows=rows, equalities=eqs, sense=sense))
    if not sol.optimal:
        logger.debug("dual LP for %s: %s", rho.key(), sol.status.value)
        return None
    m = {node_id: sol.point[index[node_id]:index[node_id] + tree.dim] for node_id in tree.node_ids()}
    return DualPair(m=m, j=j, stopping=rho, value=sol.value)


def american_dual_price(tree: EventTree, cones: ConeField, Z: AdaptedProcess, j: int,
                        n: Optional[int] = None, candidates: Optional[Iterable[MixedStoppingTime]] = None,
                        sense: str = "max") -> Tuple[Fraction, DualPair, List[DualEntry]]:
    """Grid extremum over ρ of the dual LP for the American payoff Z (max for sellers, min for buyers)."""
    n = config.DUAL_GRID if n is None else n
    grid = candidates if candidates is not None else mst_grid(tree, n)
    best: Optional[DualPair] = None
    values: List[Tuple[MixedStoppingTime, Fraction]] = []
    for rho in grid:
        pair = dual_lp(tree, cones, Z, rho, j, sense)
        if pair is None:
            continue
        values.append((rho, pair.value))
        better = best is None or (pair.value > best.value if sense == "max" else pair.value < best.value)
        if better:
            best = pair
    if best is None:
        raise ArbitrageError("every dual LP is infeasible; the cones admit no consistent prices")
    entries = [DualEntry(outer=rho, inner=rho, value=v) for rho, v in values]
    return best.value, best, entries


def seller_dual_price(tree: EventTree, cones: ConeField, payoffs: GamePayoffs, j: int,
                      n: Optional[int] = None, outer: Optional[Iterable[MixedStoppingTime]] = None,
                      primal: Optional[Fraction] = None) -> DualReport:
    """min over φ of max over ψ of the dual LP for Z = Q_{φ,·}."""
    n = config.DUAL_GRID if n is None else n
    report = DualReport(Side.SELLER, n, j, primal=primal)
    for phi in (outer if outer is not None else mst_grid(tree, n)):
        value, pair, entries = american_dual_price(tree, cones, q_seller_process(tree, payoffs, phi), j, n, sense="max")
        report.entries += [DualEntry(outer=phi, inner=e.inner, value=e.value) for e in entries]
        report.best[phi.key()] = DualPair(pair.m, j, pair.stopping, value, outer=phi)
        if report.value is None or value < report.value:
            report.value, report.argument = value, phi
    logger.info("seller dual grid 1/%d: %s", n, fmt(report.value))
    return report


def buyer_dual_price(tree: EventTree, cones: ConeField, payoffs: GamePayoffs, j: int,
                     n: Optional[int] = None, outer: Optional[Iterable[MixedStoppingTime]] = None,
                     primal: Optional[Fraction] = None) -> DualReport:
    """max over ψ of min over φ of the dual LP for Z = Q_{·,ψ}."""
    n = config.DUAL_GRID if n is None else n
    report = DualReport(Side.BUYER, n, j, primal=primal)
    for psi in (outer if outer is not None else mst_grid(tree, n)):
        value, pair, entries = american_dual_price(tree, cones, q_buyer_process(tree, payoffs, psi), j, n, sense="min")
        report.entries += [DualEntry(outer=psi, inner=e.inner, value=e.value) for e in entries]
        report.best[psi.key()] = DualPair(pair.m, j, pair.stopping, value, outer=psi)
        if report.value is None or value > report.value:
            report.value, report.argument = value, psi
    logger.info("buyer dual grid 1/%d: %s", n, fmt(report.value))
    return report


def pair_feasible(tree: EventTree, cones: ConeField, pair: DualPair) -> bool:
    """Exact re-substitution of m into the dual constraints."""
    d, j, rho = tree.dim, pair.j, pair.stopping
    m = pair.m
    for node_id in tree.node_ids():
        Qs = cones.Q_star(node_id)
        if not Qs.contains(m[node_id]):
            return False
        if tree.is_leaf(node_id):
            continue
        later = vsum((mul(rho[mu], m[mu]) for mu in tree.descendants(node_id)[1:]), d)
        if not Qs.contains(later):
            return False
        if m[node_id][j] != sum((m[c][j] for c in tree.children(node_id)), Fraction(0)):
            return False
    return m[tree.root][j] == 1


def pair_value(tree: EventTree, Z: AdaptedProcess, pair: DualPair) -> Fraction:
    return sum((pair.stopping[i] * dot(Z[i], pair.m[i]) for i in tree.node_ids()), Fraction(0))


def certify(tree: EventTree, cones: ConeField, pair: DualPair, payoffs: GamePayoffs,
            side: Side, price: Fraction) -> bool:
    """Feasibility plus the right-sided bound: seller pairs stay <= ask, buyer pairs >= bid."""
    if pair.outer is None or not pair_feasible(tree, cones, pair):
        return False
    if side is Side.SELLER:
        value = pair_value(tree, q_seller_process(tree, payoffs, pair.outer), pair)
        return value <= price
    value = pair_value(tree, q_buyer_process(tree, payoffs, pair.outer), pair)
    return value >= price


def to_price_system(tree: EventTree, pair: DualPair) -> Tuple[Dict[str, Fraction], Dict[str, Vector]]:
    """(q, S) with q(ν) = m^j(ν) and S = m / q on nodes of positive weight."""
    q = {i: pair.m[i][pair.j] for i in tree.node_ids()}
    S = {i: mul(1 / q[i], pair.m[i]) for i in tree.node_ids() if q[i] > 0}
    return q, S


def price_system_holds(tree: EventTree, cones: ConeField, pair: DualPair) -> bool:
    """The (q, S) conditions: S^j = 1, S ∈ Q*, and q-conditional later prices weighted by ρ in Q*."""
    q, S = to_price_system(tree, pair)
    rho, d = pair.stopping, tree.dim
    for node_id, s in S.items():
        if s[pair.j] != 1 or not cones.Q_star(node_id).contains(s):
            return False
        if tree.is_leaf(node_id):
            continue
        later = vsum((mul(q[mu] / q[node_id] * rho[mu], S[mu])
                      for mu in tree.descendants(node_id)[1:] if q[mu] > 0), d)
        if not cones.Q_star(node_id).contains(later):
            return False
    return True
