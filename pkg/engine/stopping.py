# engine/stopping.py
"""Mixed stopping times and the payoff algebra of game options."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Collection, Dict, Iterator, List, Mapping, Optional, Union

from . import config
from .errors import GridTooLargeError, ModelError
from .polyhedra import Polyhedron
from .tree import AdaptedProcess, EventTree
from .vectors import Vector, add, mul, sub, vsum, zeros

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MixedStoppingTime:
    """φ_t(ν) >= 0 at every node, summing to 1 along every root-to-leaf path."""
    values: Mapping[str, Fraction]

    def __getitem__(self, node_id: str) -> Fraction:
        return self.values[node_id]

    def key(self) -> tuple:
        return tuple(sorted(self.values.items()))

    def is_pure(self) -> bool:
        return all(v in (0, 1) for v in self.values.values())


@dataclass(frozen=True)
class StarProcess:
    """φ*_{t+1} stored at each node ν of time t; φ*_0 = 1 and φ*_{T+1} = 0."""
    values: Mapping[str, Fraction]

    def at(self, tree: EventTree, node_id: str) -> Fraction:
        if node_id == tree.root:
            return Fraction(1)
        return self.values[tree.parent(node_id)]

    def after(self, tree: EventTree, node_id: str) -> Fraction:
        return self.values[node_id]


@dataclass(frozen=True)
class GamePayoffs:
    """Y is paid on exercise, X on cancellation; X_t − Y_t must lie in K_t."""
    Y: AdaptedProcess
    X: AdaptedProcess

    def scaled(self, lam: Fraction) -> "GamePayoffs":
        return GamePayoffs(AdaptedProcess({i: mul(lam, v) for i, v in self.Y.values.items()}),
                           AdaptedProcess({i: mul(lam, v) for i, v in self.X.values.items()}))

    def validate(self, tree: EventTree, K: Mapping[str, Polyhedron]) -> None:
        for node_id in tree.node_ids():
            if not K[node_id].contains(sub(self.X[node_id], self.Y[node_id])):
                raise ModelError(f"cancellation payoff minus exercise payoff is not solvent at '{node_id}'")


def validate_mst(tree: EventTree, phi: Mapping[str, Fraction]) -> MixedStoppingTime:
    for node_id in tree.node_ids():
        if node_id not in phi:
            raise ModelError(f"stopping time has no value at '{node_id}'")
        if phi[node_id] < 0:
            raise ModelError(f"stopping time is negative at '{node_id}'")
    for leaf in tree.leaves():
        total = sum((Fraction(phi[i]) for i in tree.path(leaf)), Fraction(0))
        if total != 1:
            raise ModelError(f"stopping time sums to {total} along the path to '{leaf}'")
    return MixedStoppingTime({i: Fraction(phi[i]) for i in tree.node_ids()})


def star(tree: EventTree, phi: MixedStoppingTime) -> StarProcess:
    """Suffix sums φ*_t = Σ_{s>=t} φ_s, stored predictably."""
    out: Dict[str, Fraction] = {}
    for t in range(tree.horizon + 1):
        for node_id in tree.atoms(t):
            before = Fraction(1) if node_id == tree.root else out[tree.parent(node_id)]
            out[node_id] = before - phi[node_id]
    return StarProcess(out)


def embed_stopping_time(tree: EventTree, stops: Collection[str]) -> MixedStoppingTime:
    """χ^τ for the ordinary stopping time whose stopping nodes are `stops`."""
    stops = set(stops)
    for leaf in tree.leaves():
        hits = [i for i in tree.path(leaf) if i in stops]
        if len(hits) != 1:
            raise ModelError(f"region is not a stopping time: path to '{leaf}' meets it {len(hits)} times")
    return MixedStoppingTime({i: Fraction(1 if i in stops else 0) for i in tree.node_ids()})


def first_hitting_time(tree: EventTree, predicate: Callable[[str], bool]) -> MixedStoppingTime:
    """First node on each path where `predicate` holds, or the leaf if it never does."""
    stops = set()
    for leaf in tree.leaves():
        path = tree.path(leaf)
        stops.add(next((i for i in path if predicate(i)), leaf))
    return embed_stopping_time(tree, stops)


def deterministic(tree: EventTree, t: int) -> MixedStoppingTime:
    """χ^t for the constant stopping time t."""
    return embed_stopping_time(tree, tree.atoms(t))


def mst_min(tree: EventTree, psi: MixedStoppingTime, phi: MixedStoppingTime) -> MixedStoppingTime:
    """(ψ∧φ)_t = ψ_t φ*_t + ψ*_{t+1} φ_t."""
    ps, fs = star(tree, psi), star(tree, phi)
    out = {i: psi[i] * fs.at(tree, i) + ps.after(tree, i) * phi[i] for i in tree.node_ids()}
    return validate_mst(tree, out)


Value = Union[Fraction, Vector]


def evaluate_at(tree: EventTree, process: Union[AdaptedProcess, Mapping[str, Fraction]],
                phi: MixedStoppingTime) -> Dict[str, Value]:
    """X_φ = Σ_t φ_t X_t per leaf; scalar processes are accepted as plain node maps."""
    values = process.values if isinstance(process, AdaptedProcess) else process
    out: Dict[str, Value] = {}
    for leaf in tree.leaves():
        path = tree.path(leaf)
        if isinstance(values[path[0]], tuple):
            out[leaf] = vsum((mul(phi[i], values[i]) for i in path), len(values[path[0]]))
        else:
            out[leaf] = sum((phi[i] * values[i] for i in path), Fraction(0))
    return out


def payoff_G(tree: EventTree, payoffs: GamePayoffs, phi: MixedStoppingTime, psi: MixedStoppingTime,
             node_id: str, phi_star: Optional[StarProcess] = None,
             psi_star: Optional[StarProcess] = None) -> Vector:
    """G_t = ψ_t φ*_t Y_t + ψ*_{t+1} φ_t X_t; φ is the seller's time, ψ the buyer's."""
    fs = phi_star or star(tree, phi)
    ps = psi_star or star(tree, psi)
    return add(mul(psi[node_id] * fs.at(tree, node_id), payoffs.Y[node_id]),
               mul(ps.after(tree, node_id) * phi[node_id], payoffs.X[node_id]))


def q_seller_process(tree: EventTree, payoffs: GamePayoffs, phi: MixedStoppingTime) -> AdaptedProcess:
    """Q_{φ,t} = φ*_t Y_t + Σ_{s<t} φ_s X_s."""
    fs = star(tree, phi)
    d = tree.dim
    out = {}
    for node_id in tree.node_ids():
        path = tree.path(node_id)
        cancelled = vsum((mul(phi[i], payoffs.X[i]) for i in path[:-1]), d)
        out[node_id] = add(mul(fs.at(tree, node_id), payoffs.Y[node_id]), cancelled)
    return AdaptedProcess(out)


def q_buyer_process(tree: EventTree, payoffs: GamePayoffs, psi: MixedStoppingTime) -> AdaptedProcess:
    """Q_{t,ψ} = Σ_{s<=t} ψ_s Y_s + ψ*_{t+1} X_t."""
    ps = star(tree, psi)
    d = tree.dim
    out = {}
    for node_id in tree.node_ids():
        exercised = vsum((mul(psi[i], payoffs.Y[i]) for i in tree.path(node_id)), d)
        out[node_id] = add(exercised, mul(ps.after(tree, node_id), payoffs.X[node_id]))
    return AdaptedProcess(out)


def q_fixed(tree: EventTree, payoffs: GamePayoffs, s: int, t: int, leaf: str) -> Vector:
    """Q_{s,t} on the path to `leaf`: Y_t if s >= t (exercise first), else X_s."""
    path = tree.path(leaf)
    return payoffs.Y[path[t]] if s >= t else payoffs.X[path[s]]


def q_total(tree: EventTree, payoffs: GamePayoffs, phi: MixedStoppingTime,
            psi: MixedStoppingTime) -> Dict[str, Vector]:
    """Q_{φ,ψ} = Σ_s Σ_t φ_s ψ_t Q_{s,t}, per leaf."""
    out = {}
    for leaf in tree.leaves():
        path = tree.path(leaf)
        total = zeros(tree.dim)
        for s, si in enumerate(path):
            for t, ti in enumerate(path):
                w = phi[si] * psi[ti]
                if w:
                    total = add(total, mul(w, q_fixed(tree, payoffs, s, t, leaf)))
        out[leaf] = total
    return out


def payoff_Q(tree: EventTree, payoffs: GamePayoffs, phi: Optional[MixedStoppingTime] = None,
             psi: Optional[MixedStoppingTime] = None):
    """Q_{φ,·}, Q_{·,ψ} or the per-leaf total Q_{φ,ψ}, depending on which times are given."""
    if phi is not None and psi is not None:
        return q_total(tree, payoffs, phi, psi)
    if phi is not None:
        return q_seller_process(tree, payoffs, phi)
    if psi is not None:
        return q_buyer_process(tree, payoffs, psi)
    raise ModelError("payoff_Q needs at least one stopping time")


def mst_grid(tree: EventTree, n: int, limit: Optional[int] = None) -> Iterator[MixedStoppingTime]:
    """All mixed stopping times with node values on the 1/n lattice, depth first.

    Leaves take whatever mass is left, so only non-leaf nodes branch.
    """
    limit = config.MAX_GRID_POINTS if limit is None else limit
    inner = [i for t in range(tree.horizon) for i in tree.atoms(t)]
    step = Fraction(1, n)
    count = 0

    def walk(k: int, mass: Dict[str, Fraction], chosen: Dict[str, Fraction]):
        nonlocal count
        if k == len(inner):
            values = dict(chosen)
            for leaf in tree.leaves():
                values[leaf] = mass[leaf]
            count += 1
            if count > limit:
                raise GridTooLargeError(f"grid 1/{n} exceeds {limit} stopping times")
            yield MixedStoppingTime(values)
            return
        node_id = inner[k]
        left = mass[node_id]
        v = Fraction(0)
        while v <= left:
            chosen[node_id] = v
            for c in tree.children(node_id):
                mass[c] = left - v
            yield from walk(k + 1, mass, chosen)
            v += step
        del chosen[node_id]

    yield from walk(0, {tree.root: Fraction(1)}, {})


def instant_only(opponents: List[MixedStoppingTime]) -> List[MixedStoppingTime]:
    """Keeps the ordinary (all-or-nothing) stopping times."""
    return [o for o in opponents if o.is_pure()]
