# engine/polyhedra.py
"""Closed convex polyhedra in Q^d with exact double description.

A `Polyhedron` carries an H-representation (halfspaces a·x >= b), a
V-representation (points and rays, lines stored as opposite ray pairs) or
both. Conversions go through cddlib in exact fraction mode; the results are
stripped of redundant rows and put in a canonical order.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

import cdd

from .errors import PreconditionError
from .lp import LpProblem, LpSolution, LpStatus, lp_solve
from .vectors import (
    Vector, add, dot, echelon_basis, fmt, is_zero, mul, neg, primitive, sub, unit, zeros,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Halfspace:
    """The closed halfspace {x : normal·x >= offset}."""
    normal: Vector
    offset: Fraction

    def holds(self, x: Sequence[Fraction]) -> bool:
        return dot(self.normal, x) >= self.offset

    def slack(self, x: Sequence[Fraction]) -> Fraction:
        return dot(self.normal, x) - self.offset

    def describe(self) -> str:
        """Human form with the last nonzero coefficient scaled to ±1, e.g. "10x1+x2>=14/3"."""
        last = next((c for c in reversed(self.normal) if c != 0), None)
        if last is None:
            return f"0>={fmt(self.offset)}"
        s = 1 / abs(last)
        terms = []
        for k, c in enumerate(self.normal, start=1):
            c = c * s
            if c == 0:
                continue
            coef = "" if abs(c) == 1 else (str(abs(c.numerator)) if c.denominator == 1 else f"{abs(c.numerator)}/{c.denominator}")
            sign = "-" if c < 0 else ("+" if terms else "")
            terms.append(f"{sign}{coef}x{k}")
        off = self.offset * s
        off_s = str(off.numerator) if off.denominator == 1 else fmt(off)
        return "".join(terms) + ">=" + off_s


def _canonical_halfspace(a: Sequence[Fraction], b: Fraction) -> Halfspace:
    p = primitive(tuple(a) + (-Fraction(b),))
    return Halfspace(p[:-1], -p[-1])


def _cdd_matrix(rows: Sequence[Sequence[Fraction]], rep_type) -> cdd.Matrix:
    mat = cdd.Matrix(rows, number_type="fraction")
    mat.rep_type = rep_type
    return mat


def _cdd_rows(mat: cdd.Matrix) -> Tuple[List[Vector], frozenset]:
    """Rows of `mat` after redundancy removal, with the indices of its linearities."""
    if mat.row_size == 0:
        return [], frozenset()
    mat.canonicalize()
    rows = [tuple(Fraction(x) for x in mat[i]) for i in range(mat.row_size)]
    return rows, frozenset(mat.lin_set)


class Polyhedron:
    """Closed convex polyhedron in Q^dim; immutable, representations filled lazily."""

    def __init__(self, dim: int, halfspaces: Optional[Iterable[Halfspace]] = None,
                 points: Optional[Iterable[Vector]] = None, rays: Optional[Iterable[Vector]] = None):
        self.dim = dim
        self._h = None if halfspaces is None else tuple(halfspaces)
        if points is None and rays is None:
            self._v = None
        else:
            self._v = (tuple(tuple(Fraction(x) for x in p) for p in (points or ())),
                       tuple(tuple(Fraction(x) for x in r) for r in (rays or ())))

    # --- constructors ---
    @classmethod
    def from_halfspaces(cls, dim: int, rows: Iterable[Tuple[Sequence, object]]) -> "Polyhedron":
        return cls(dim, halfspaces=[_canonical_halfspace(tuple(Fraction(x) for x in a), Fraction(b)) for a, b in rows])

    @classmethod
    def from_generators(cls, dim: int, points: Iterable[Sequence], rays: Iterable[Sequence] = ()) -> "Polyhedron":
        return cls(dim, points=[tuple(Fraction(x) for x in p) for p in points],
                   rays=[tuple(Fraction(x) for x in r) for r in rays])

    @classmethod
    def cone(cls, dim: int, generators: Iterable[Sequence]) -> "Polyhedron":
        return cls.from_generators(dim, [zeros(dim)], generators)

    @classmethod
    def full(cls, dim: int) -> "Polyhedron":
        return cls(dim, halfspaces=())

    @classmethod
    def empty(cls, dim: int) -> "Polyhedron":
        return cls(dim, points=(), rays=())

    # --- representations ---
    @property
    def halfspaces(self) -> Tuple[Halfspace, ...]:
        if self._h is None:
            self._h = _v_to_h(self.dim, *self._v)
        return self._h

    @property
    def points(self) -> Tuple[Vector, ...]:
        if self._v is None:
            self._v = _h_to_v(self.dim, self._h)
        return self._v[0]

    @property
    def rays(self) -> Tuple[Vector, ...]:
        if self._v is None:
            self._v = _h_to_v(self.dim, self._h)
        return self._v[1]

    @property
    def has_hrep(self) -> bool:
        return self._h is not None

    @property
    def has_vrep(self) -> bool:
        return self._v is not None

    def is_empty(self) -> bool:
        return not self.points

    def is_cone(self) -> bool:
        if self.is_empty():
            return False
        return all(h.offset == 0 for h in self.halfspaces)

    def contains(self, x: Sequence[Fraction]) -> bool:
        return all(h.holds(x) for h in self.halfspaces)

    def violated(self, x: Sequence[Fraction]) -> List[Halfspace]:
        return [h for h in self.halfspaces if not h.holds(x)]

    def describe(self) -> str:
        if self.is_empty():
            return "{}"
        if not self.halfspaces:
            return "{R^%d}" % self.dim
        return "{" + ", ".join(h.describe() for h in self.halfspaces) + "}"

    def __repr__(self) -> str:
        return f"Polyhedron({self.describe()})"


def _h_to_v(dim: int, halfspaces: Sequence[Halfspace]) -> Tuple[Tuple[Vector, ...], Tuple[Vector, ...]]:
    # cdd rows read b + a·x >= 0; the leading 1 >= 0 keeps the matrix nonempty
    ineqs = [(Fraction(1),) + zeros(dim)] + [(-h.offset,) + tuple(h.normal) for h in halfspaces]
    gens = cdd.Polyhedron(_cdd_matrix(ineqs, cdd.RepType.INEQUALITY)).get_generators()
    rows, lin = _cdd_rows(gens)
    if not rows:
        return (), ()
    pts = [tuple(x / r[0] for x in r[1:]) for r in rows if r[0] != 0]
    dirs = [r[1:] for i, r in enumerate(rows) if r[0] == 0 and i not in lin]
    lines = [r[1:] for i, r in enumerate(rows) if r[0] == 0 and i in lin]
    if not pts:
        # a cone given by rays alone; its apex is the origin
        pts = [zeros(dim)]
    return _canonical_vrep(dim, pts, dirs, lines)


def _canonical_vrep(dim: int, points, rays, lines=()):
    """Reduces points and rays modulo the lineality space and orders them."""
    lin = echelon_basis([l for l in lines if not is_zero(l)], dim)

    def reduce(v):
        for pc, row in lin:
            if v[pc] != 0:
                v = sub(v, mul(v[pc], row))
        return v

    pts = sorted({reduce(tuple(p)) for p in points})
    dirs = {primitive(reduce(tuple(r))) for r in rays}
    dirs.discard(zeros(dim))
    for _, row in lin:
        l = primitive(row)
        dirs.add(l)
        dirs.add(tuple(-x for x in l))
    return tuple(pts), tuple(sorted(dirs))


def _v_to_h(dim: int, points: Sequence[Vector], rays: Sequence[Vector]) -> Tuple[Halfspace, ...]:
    if not points:
        return (Halfspace(zeros(dim), Fraction(1)),)
    gens = [(Fraction(1),) + tuple(p) for p in points] + [(Fraction(0),) + tuple(r) for r in rays]
    ineqs = cdd.Polyhedron(_cdd_matrix(gens, cdd.RepType.GENERATOR)).get_inequalities()
    rows, lin = _cdd_rows(ineqs)
    out = set()
    for i, r in enumerate(rows):
        b, a = r[0], r[1:]
        if is_zero(a):
            continue
        out.add(_canonical_halfspace(a, -b))
        if i in lin:
            out.add(_canonical_halfspace(neg(a), b))
    return tuple(sorted(out))


# --- operations ---

def convert(p: Polyhedron) -> Polyhedron:
    """Both representations, irredundant and canonical."""
    if p.has_hrep:
        v = _h_to_v(p.dim, p.halfspaces)
        if not v[0]:
            return Polyhedron(p.dim, halfspaces=(Halfspace(zeros(p.dim), Fraction(1)),), points=(), rays=())
        return Polyhedron(p.dim, halfspaces=_v_to_h(p.dim, *v), points=v[0], rays=v[1])
    pts, rays = p.points, p.rays
    if not pts:
        return Polyhedron.empty(p.dim)
    h = _v_to_h(p.dim, pts, rays)
    v = _h_to_v(p.dim, h)
    return Polyhedron(p.dim, halfspaces=h, points=v[0], rays=v[1])


def _check_dims(p: Polyhedron, q: Polyhedron) -> None:
    if p.dim != q.dim:
        raise PreconditionError(f"dimension mismatch: {p.dim} vs {q.dim}")


def intersect(p: Polyhedron, q: Polyhedron) -> Polyhedron:
    _check_dims(p, q)
    return convert(Polyhedron(p.dim, halfspaces=p.halfspaces + q.halfspaces))


def intersect_all(sets: Sequence[Polyhedron]) -> Polyhedron:
    dim = sets[0].dim
    hs: Tuple[Halfspace, ...] = ()
    for s in sets:
        _check_dims(sets[0], s)
        hs += s.halfspaces
    return convert(Polyhedron(dim, halfspaces=hs))


def minkowski_sum(p: Polyhedron, q: Polyhedron) -> Polyhedron:
    _check_dims(p, q)
    if p.is_empty() or q.is_empty():
        return Polyhedron.empty(p.dim)
    pts = [add(a, b) for a in p.points for b in q.points]
    return convert(Polyhedron(p.dim, points=pts, rays=p.rays + q.rays))


def hull_union(p: Polyhedron, q: Polyhedron) -> Polyhedron:
    """Closed convex hull of p ∪ q (union of the generator sets)."""
    _check_dims(p, q)
    if p.is_empty():
        return q
    if q.is_empty():
        return p
    return convert(Polyhedron(p.dim, points=p.points + q.points, rays=p.rays + q.rays))


def translate(p: Polyhedron, v: Sequence[Fraction]) -> Polyhedron:
    v = tuple(Fraction(x) for x in v)
    h = None
    if p.has_hrep:
        h = [Halfspace(s.normal, s.offset + dot(s.normal, v)) for s in p.halfspaces]
    if p.has_vrep:
        return Polyhedron(p.dim, halfspaces=h, points=[add(x, v) for x in p.points], rays=p.rays)
    return Polyhedron(p.dim, halfspaces=h)


def scale(p: Polyhedron, lam: Fraction) -> Polyhedron:
    lam = Fraction(lam)
    if lam <= 0:
        raise PreconditionError(f"scale factor must be positive, got {fmt(lam)}")
    h = None
    if p.has_hrep:
        h = [Halfspace(s.normal, s.offset * lam) for s in p.halfspaces]
    if p.has_vrep:
        return Polyhedron(p.dim, halfspaces=h, points=[mul(lam, x) for x in p.points], rays=p.rays)
    return Polyhedron(p.dim, halfspaces=h)


def negate(p: Polyhedron) -> Polyhedron:
    """The reflected set −p."""
    h = None
    if p.has_hrep:
        h = [Halfspace(tuple(-x for x in s.normal), s.offset) for s in p.halfspaces]
    if p.has_vrep:
        return Polyhedron(p.dim, halfspaces=h, points=[mul(-1, x) for x in p.points],
                          rays=[mul(-1, r) for r in p.rays])
    return Polyhedron(p.dim, halfspaces=h)


def recession_cone(p: Polyhedron) -> Polyhedron:
    if p.is_empty():
        raise PreconditionError("recession cone of the empty set")
    return Polyhedron(p.dim, halfspaces=[Halfspace(s.normal, Fraction(0)) for s in p.halfspaces],
                      points=[zeros(p.dim)], rays=p.rays)


def contains(p: Polyhedron, x: Sequence[Fraction]) -> bool:
    return p.contains(tuple(Fraction(v) for v in x))


def contains_by_generators(p: Polyhedron, x: Sequence[Fraction]) -> bool:
    """Membership decided from the V-representation by an LP on convex weights."""
    pts, rays = p.points, p.rays
    if not pts:
        return False
    k = len(pts) + len(rays)
    eqs = []
    for i in range(p.dim):
        a = tuple(v[i] for v in pts) + tuple(r[i] for r in rays)
        eqs.append((a, Fraction(x[i])))
    eqs.append((tuple(Fraction(1) for _ in pts) + tuple(Fraction(0) for _ in rays), Fraction(1)))
    rows = [(unit(k, i), Fraction(0)) for i in range(k)]
    sol = lp_solve(LpProblem(objective=zeros(k), rows=rows, equalities=eqs))
    return sol.optimal


def subset(p: Polyhedron, q: Polyhedron) -> bool:
    _check_dims(p, q)
    if p.is_empty():
        return True
    if q.is_empty():
        return False
    hs = q.halfspaces
    return (all(all(h.holds(x) for h in hs) for x in p.points)
            and all(all(dot(h.normal, r) >= 0 for h in hs) for r in p.rays))


def equal(p: Polyhedron, q: Polyhedron) -> bool:
    return subset(p, q) and subset(q, p)


def min_along_axis(p: Polyhedron, j: int) -> LpSolution:
    """min{x : x·e^j in p}; status unbounded for −∞, infeasible if the axis misses p."""
    if p.is_empty():
        return LpSolution(LpStatus.INFEASIBLE)
    rows = [((h.normal[j],), h.offset) for h in p.halfspaces]
    return lp_solve(LpProblem(objective=(Fraction(1),), rows=rows, sense="min"))


def affine_rows(p: Polyhedron, n: int, terms: Sequence[Tuple[int, Fraction]],
                const: Optional[Sequence[Fraction]] = None,
                weight: Optional[Tuple[int, Fraction, Fraction]] = None) -> List[Tuple[Vector, Fraction]]:
    """LP rows asserting Σ coef·x[off:off+dim] + const ∈ s·p.

    `terms` lists (offset, coef) blocks of the n-vector of LP variables. The
    scale s is 1, or `base + coef·x[index]` when weight = (index, coef, base);
    at s = 0 the rows describe the recession cone.
    """
    rows = []
    for h in p.halfspaces:
        a = [Fraction(0)] * n
        for off, coef in terms:
            for k in range(p.dim):
                a[off + k] += coef * h.normal[k]
        b = h.offset
        if weight is not None:
            index, coef, base = weight
            a[index] -= coef * h.offset
            b = base * h.offset
        if const is not None:
            b = b - dot(h.normal, const)
        rows.append((tuple(a), b))
    return rows
