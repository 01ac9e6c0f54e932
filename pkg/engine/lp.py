# engine/lp.py
"""Exact rational linear programming.

A dense two-phase simplex over `fractions.Fraction` with Bland's rule, so
every run is finite and deterministic. Variables are free; constraints are
rows `a·x >= b` plus optional equalities `a·x == b`.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .vectors import Vector, dot

logger = logging.getLogger(__name__)

Row = Tuple[Vector, Fraction]


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpProblem:
    """min or max c·x subject to a·x >= b (rows) and a·x == b (equalities)."""
    objective: Vector
    rows: Sequence[Row] = ()
    equalities: Sequence[Row] = ()
    sense: str = "min"

    @property
    def n(self) -> int:
        return len(self.objective)


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    point: Optional[Vector] = None
    value: Optional[Fraction] = None

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


@dataclass
class _Tableau:
    rows: List[List[Fraction]]
    basis: List[int]
    ncols: int
    artificial_from: int
    blocked: set = field(default_factory=set)

    def pivot(self, r: int, c: int) -> None:
        prow = self.rows[r]
        p = prow[c]
        if p != 1:
            prow = [x / p for x in prow]
            self.rows[r] = prow
        for i, row in enumerate(self.rows):
            if i != r and row[c] != 0:
                f = row[c]
                self.rows[i] = [x - f * y for x, y in zip(row, prow)]
        self.basis[r] = c

    def run(self, cost: Sequence[Fraction]) -> LpStatus:
        """Minimizes cost over the current basis; Bland's smallest-index rule."""
        while True:
            reduced = list(cost)
            for i, b in enumerate(self.basis):
                cb = cost[b]
                if cb != 0:
                    row = self.rows[i]
                    for j in range(self.ncols):
                        if row[j] != 0:
                            reduced[j] -= cb * row[j]
            entering = next(
                (j for j in range(self.ncols)
                 if j not in self.blocked and reduced[j] < 0 and j not in self.basis),
                None,
            )
            if entering is None:
                return LpStatus.OPTIMAL
            leave, best = None, None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    ratio = row[-1] / a
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[leave]):
                        leave, best = i, ratio
            if leave is None:
                return LpStatus.UNBOUNDED
            self.pivot(leave, entering)

    def values(self) -> List[Fraction]:
        out = [Fraction(0)] * self.ncols
        for i, b in enumerate(self.basis):
            out[b] = self.rows[i][-1]
        return out


def lp_solve(prob: LpProblem) -> LpSolution:
    """Solves an LpProblem exactly; infeasible and unbounded are statuses, not errors."""
    n = prob.n
    ineq = list(prob.rows)
    eq = list(prob.equalities)
    n_slack = len(ineq)
    m = n_slack + len(eq)
    # columns: x+ (n) | x- (n) | slacks | artificials | rhs
    art_start = 2 * n + n_slack
    needs_art = []
    body: List[List[Fraction]] = []
    basis: List[int] = []
    for i, (a, b) in enumerate(ineq + eq):
        a = [Fraction(v) for v in a]
        b = Fraction(b)
        row = a + [-v for v in a] + [Fraction(0)] * n_slack
        if i < n_slack:
            row[2 * n + i] = Fraction(-1)
        if b < 0 or (b == 0 and i < n_slack):
            row = [-v for v in row]
            b = -b
        body.append(row)
        if i < n_slack and row[2 * n + i] == 1:
            basis.append(2 * n + i)
        else:
            basis.append(-1)
            needs_art.append(i)
        body[-1].append(b)
    n_art = len(needs_art)
    ncols = art_start + n_art
    rows = []
    for i, row in enumerate(body):
        rhs = row.pop()
        rows.append(row + [Fraction(0)] * n_art + [rhs])
    for k, i in enumerate(needs_art):
        rows[i][art_start + k] = Fraction(1)
        basis[i] = art_start + k
    tab = _Tableau(rows=rows, basis=basis, ncols=ncols, artificial_from=art_start)

    if n_art:
        phase1 = [Fraction(0)] * art_start + [Fraction(1)] * n_art
        tab.run(phase1)
        infeasibility = sum((tab.rows[i][-1] for i, b in enumerate(tab.basis) if b >= art_start), Fraction(0))
        if infeasibility > 0:
            logger.debug("LP infeasible (phase one residual %s)", infeasibility)
            return LpSolution(LpStatus.INFEASIBLE)
        _drive_out_artificials(tab)
    tab.blocked = set(range(art_start, tab.ncols))

    sign = Fraction(-1) if prob.sense == "max" else Fraction(1)
    c = [sign * Fraction(v) for v in prob.objective]
    cost = c + [-v for v in c] + [Fraction(0)] * (tab.ncols - 2 * n)
    if tab.run(cost) is LpStatus.UNBOUNDED:
        logger.debug("LP unbounded")
        return LpSolution(LpStatus.UNBOUNDED)
    vals = tab.values()
    point = tuple(vals[j] - vals[n + j] for j in range(n))
    value = dot(prob.objective, point)
    logger.debug("LP optimal value %s", value)
    return LpSolution(LpStatus.OPTIMAL, point, value)


def _drive_out_artificials(tab: _Tableau) -> None:
    i = 0
    while i < len(tab.rows):
        if tab.basis[i] >= tab.artificial_from:
            row = tab.rows[i]
            col = next((j for j in range(tab.artificial_from) if row[j] != 0), None)
            if col is None:
                # redundant equality
                del tab.rows[i]
                del tab.basis[i]
                continue
            tab.pivot(i, col)
        i += 1
