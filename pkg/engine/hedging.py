# engine/hedging.py
"""Hedge extraction from the set ladders, conversion to full superhedges, and verification.

The extracted object pairs the hedger's own mixed stopping time with a
backbone z. A backbone only needs deferred solvency (Q_t); the full recipe
adds one liquidation strategy per node so that evaluation against any
opponent rebalances inside K_t.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

from .errors import InfeasibleInitialError, PreconditionError
from .lp import LpProblem, lp_solve
from .market import ConeField, liquidation_strategy
from .polyhedra import Polyhedron, affine_rows
from .pricing import SetLadder, Side
from .stopping import GamePayoffs, MixedStoppingTime, StarProcess, payoff_G, star, validate_mst
from .tree import EventTree, PredictableProcess
from .vectors import Vector, add, fmt, fmt_vec, mul, sub, unit, vsum, zeros

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LambdaHedge:
    """Own stopping time plus backbone z (z_0 = initial, z_{t+1} stored at each non-leaf node)."""
    side: Side
    stopping: MixedStoppingTime
    backbone: PredictableProcess

    def position(self, tree: EventTree, node_id: str) -> Optional[Vector]:
        """Per-unit position z_t / φ*_t, or None where nothing is left to stop."""
        remaining = star(tree, self.stopping).at(tree, node_id)
        if remaining == 0:
            return None
        return mul(1 / remaining, self.backbone.at(tree, node_id))


@dataclass(frozen=True)
class HedgeRecipe:
    """A LambdaHedge with its two liquidation families, keyed by the node they start at."""
    hedge: LambdaHedge
    first: Dict[str, PredictableProcess]
    second: Dict[str, PredictableProcess]

    @property
    def side(self) -> Side:
        return self.hedge.side


@dataclass
class Violation:
    opponent: int
    node: str
    detail: str


@dataclass
class VerifyReport:
    side: Side
    opponents: int
    violations: List[Violation] = field(default_factory=list)
    nonanticipation: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations and not self.nonanticipation


# --- extraction ---

def _split_lp(tree: EventTree, w: Vector, near: Polyhedron, far: Polyhedron) -> Tuple[Fraction, Vector]:
    """Least λ with w ∈ (1−λ)·near + λ·far; returns λ and the near part (1−λ)v."""
    d = tree.dim
    n = d + 1
    rows = affine_rows(near, n, [(0, Fraction(1))], weight=(d, Fraction(-1), Fraction(1)))
    rows += affine_rows(far, n, [(0, Fraction(-1))], const=w, weight=(d, Fraction(1), Fraction(0)))
    rows.append((unit(n, d), Fraction(0)))
    rows.append((tuple(-x for x in unit(n, d)), Fraction(-1)))
    sol = lp_solve(LpProblem(objective=unit(n, d), rows=rows, sense="min"))
    if not sol.optimal:
        raise PreconditionError(f"position {fmt_vec(w)} admits no split")
    return sol.point[d], sol.point[:d]


def _carry_forward(tree: EventTree, cones: ConeField, node_id: str, v: Vector, W: Polyhedron) -> Vector:
    """A point w of W with v − w ∈ Q_t, staying as close to v as Q allows."""
    if W.contains(v):
        return v
    d = tree.dim
    Q = cones.Q[node_id]
    rows = affine_rows(W, d, [(0, Fraction(1))])
    rows += affine_rows(Q, d, [(0, Fraction(-1))], const=v)
    objective = tuple(-x for x in vsum((h.normal for h in Q.halfspaces), d))
    sol = lp_solve(LpProblem(objective=objective, rows=rows, sense="min"))
    if not sol.optimal:
        raise PreconditionError(f"no successor position below {fmt_vec(v)} at '{node_id}'")
    return sol.point


def extract_lambda_hedge(tree: EventTree, cones: ConeField, payoffs: GamePayoffs,
                         ladder: SetLadder, initial: Vector) -> LambdaHedge:
    """Walks forward from `initial` ∈ Z_0, stopping as little as possible at each node."""
    initial = tuple(Fraction(x) for x in initial)
    z0 = ladder.Z0
    if not z0.contains(initial):
        bad = z0.violated(initial)
        text = bad[0].describe() if bad else None
        raise InfeasibleInitialError(
            f"initial {fmt_vec(initial)} is outside Z_0 of the {ladder.side.value}", halfspace=text)
    d = tree.dim
    phi: Dict[str, Fraction] = {}
    z_after: Dict[str, Vector] = {}
    remaining: Dict[str, Fraction] = {}
    for t in range(tree.horizon + 1):
        for node_id in tree.atoms(t):
            parent = tree.parent(node_id)
            z = initial if parent is None else z_after[parent]
            mass = Fraction(1) if parent is None else remaining[parent]
            if tree.is_leaf(node_id):
                phi[node_id] = mass
                continue
            if mass == 0:
                phi[node_id] = Fraction(0)
                remaining[node_id] = Fraction(0)
                z_after[node_id] = zeros(d)
                continue
            sets = ladder[node_id]
            w = mul(1 / mass, z)
            near_set, far_set = (sets.V, sets.X) if ladder.side is Side.SELLER else (sets.VX, sets.Y)
            if near_set.contains(w):
                lam, near = Fraction(0), w
            else:
                lam, near = _split_lp(tree, w, near_set, far_set)
            phi[node_id] = mass * lam
            remaining[node_id] = mass * (1 - lam)
            if lam == 1:
                z_after[node_id] = zeros(d)
            else:
                v = mul(1 / (1 - lam), near)
                z_after[node_id] = mul(remaining[node_id], _carry_forward(tree, cones, node_id, v, sets.W))
            logger.debug("%s at %s: stop %s, carry %s", ladder.side.value, node_id,
                         fmt(phi[node_id]), fmt_vec(z_after[node_id]))
    hedge = LambdaHedge(ladder.side, validate_mst(tree, phi), PredictableProcess(initial, z_after))
    problems = lambda_violations(tree, cones, payoffs, hedge)
    if problems:
        raise PreconditionError("extracted hedge fails its own conditions: " + "; ".join(problems))
    return hedge


def lambda_violations(tree: EventTree, cones: ConeField, payoffs: GamePayoffs, hedge: LambdaHedge) -> List[str]:
    """Checks the deferred-solvency conditions of a backbone; empty list means valid."""
    own = hedge.stopping
    rem = star(tree, own)
    out = []
    for node_id in tree.node_ids():
        Q = cones.Q[node_id]
        z = hedge.backbone.at(tree, node_id)
        z_next = hedge.backbone.after(tree, node_id)
        if hedge.side is Side.SELLER:
            step = sub(sub(z, mul(own[node_id], payoffs.X[node_id])), z_next)
            stop = sub(z, mul(rem.at(tree, node_id), payoffs.Y[node_id]))
        else:
            step = sub(add(z, mul(own[node_id], payoffs.Y[node_id])), z_next)
            stop = add(add(z, mul(own[node_id], payoffs.Y[node_id])),
                       mul(rem.after(tree, node_id), payoffs.X[node_id]))
        if not tree.is_leaf(node_id) and not Q.contains(step):
            out.append(f"step {fmt_vec(step)} not in Q at '{node_id}'")
        if not Q.contains(stop):
            out.append(f"stop {fmt_vec(stop)} not in Q at '{node_id}'")
    return out


# --- conversion ---

def _starts(tree: EventTree, payoffs: GamePayoffs, hedge: LambdaHedge, node_id: str) -> Tuple[Optional[Vector], Vector]:
    own = hedge.stopping
    rem = star(tree, own)
    z = hedge.backbone.at(tree, node_id)
    z_next = hedge.backbone.after(tree, node_id)
    if hedge.side is Side.SELLER:
        first = sub(sub(z, mul(own[node_id], payoffs.X[node_id])), z_next)
        second = sub(z, mul(rem.at(tree, node_id), payoffs.Y[node_id]))
    else:
        first = sub(add(z, mul(own[node_id], payoffs.Y[node_id])), z_next)
        second = add(add(z, mul(own[node_id], payoffs.Y[node_id])),
                     mul(rem.after(tree, node_id), payoffs.X[node_id]))
    return (None if tree.is_leaf(node_id) else first), second


def lambda_to_full_hedge(tree: EventTree, cones: ConeField, payoffs: GamePayoffs, hedge: LambdaHedge) -> HedgeRecipe:
    """Attaches a liquidation strategy to each node's two deferred-solvent residuals."""
    first, second = {}, {}
    for node_id in tree.node_ids():
        y_start, x_start = _starts(tree, payoffs, hedge, node_id)
        if y_start is not None:
            first[node_id] = liquidation_strategy(tree, cones, node_id, y_start)
        second[node_id] = liquidation_strategy(tree, cones, node_id, x_start)
    logger.info("%s recipe: %d + %d liquidation strategies", hedge.side.value, len(first), len(second))
    return HedgeRecipe(hedge, first, second)


def evaluate_recipe(tree: EventTree, recipe: HedgeRecipe, opponent: MixedStoppingTime,
                    opponent_star: Optional[StarProcess] = None) -> PredictableProcess:
    """u_{t+1} = ρ*_{t+1} z_{t+1} + Σ_{s<=t} ρ*_{s+1} y^s_{t+1} + Σ_{s<=t} ρ_s x^s_{t+1} for opponent ρ."""
    rho = opponent
    rs = opponent_star or star(tree, rho)
    d = tree.dim
    values = {}
    for node_id in tree.non_leaves():
        u = mul(rs.after(tree, node_id), recipe.hedge.backbone.after(tree, node_id))
        for anc in tree.path(node_id):
            u = add(u, mul(rs.after(tree, anc), recipe.first[anc].values[node_id]))
            if rho[anc]:
                u = add(u, mul(rho[anc], recipe.second[anc].values[node_id]))
        values[node_id] = u
    return PredictableProcess(recipe.hedge.backbone.initial, values)


# --- verification ---

def verify_hedge(tree: EventTree, cones: ConeField, payoffs: GamePayoffs, recipe: HedgeRecipe,
                 opponents: Iterable[MixedStoppingTime]) -> VerifyReport:
    """Exact K_t rebalancing check at every node for every opponent, plus a non-anticipation spot check."""
    opponents = list(opponents)
    own = recipe.hedge.stopping
    own_star = star(tree, own)
    seller = recipe.side is Side.SELLER
    report = VerifyReport(recipe.side, len(opponents))
    seen: Dict[Tuple[str, tuple], Vector] = {}
    for k, rho in enumerate(opponents):
        rs = star(tree, rho)
        u = evaluate_recipe(tree, recipe, rho, rs)
        for node_id in tree.node_ids():
            if seller:
                G = payoff_G(tree, payoffs, own, rho, node_id, phi_star=own_star, psi_star=rs)
                rebalance = sub(sub(u.at(tree, node_id), G), u.after(tree, node_id))
            else:
                G = payoff_G(tree, payoffs, rho, own, node_id, phi_star=rs, psi_star=own_star)
                rebalance = sub(add(u.at(tree, node_id), G), u.after(tree, node_id))
            if not cones.K[node_id].contains(rebalance):
                report.violations.append(Violation(k, node_id, f"rebalancing {fmt_vec(rebalance)} not in K"))
            if not tree.is_leaf(node_id):
                key = (node_id, tuple(rho[i] for i in tree.path(node_id)))
                held = u.after(tree, node_id)
                if key in seen and seen[key] != held:
                    report.nonanticipation.append(
                        f"opponent {k} at '{node_id}': holding depends on future stopping")
                seen.setdefault(key, held)
    logger.info("%s hedge checked against %d opponents: %d violations",
                recipe.side.value, len(opponents), len(report.violations))
    return report


def describe_stopping(tree: EventTree, hedge: LambdaHedge) -> List[str]:
    """One line per node with positive stopping mass, e.g. "cancel 1/3 at u (t=1)"."""
    verb = "cancel" if hedge.side is Side.SELLER else "exercise"
    lines = []
    for t in range(tree.horizon + 1):
        for node_id in tree.atoms(t):
            mass = hedge.stopping[node_id]
            if mass:
                amount = str(mass.numerator) if mass.denominator == 1 else fmt(mass)
                lines.append(f"{verb} {amount} at {node_id} (t={t})")
    return lines
