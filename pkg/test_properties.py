# test_properties.py
"""Seeded sweeps over small random markets and polyhedra."""

import random
from fractions import Fraction

import pytest

from engine.hedging import extract_lambda_hedge, lambda_to_full_hedge, verify_hedge
from engine.lp import LpProblem, lp_solve
from engine.market import check_no_arbitrage, cone_monotone, deferred_cones, validate_rates
from engine.polyhedra import Polyhedron, contains_by_generators, convert, equal
from engine.pricing import Side, ask_price, bid_price, build_ladder
from engine.stopping import GamePayoffs, deterministic, mst_grid, mst_min, payoff_G, q_total
from engine.tree import AdaptedProcess, NodeEntry, build_tree
from engine.vectors import add, dot, mul, unit, vec, vsum

F = Fraction
HALF = F(1, 2)
SWEEP = range(200)
# (currencies, steps); markets for seed s use SHAPES[s % len(SHAPES)]
SHAPES = [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3)]
SEEDS = [2, 3, 10, 11]


def binary_tree(horizon=2, dim=2):
    """Recombination-free binary tree; node ids spell the path, e.g. "ud"."""
    entries = [NodeEntry("root", 0, None)]
    paths = [""]
    for t in range(1, horizon + 1):
        paths = [p + step for p in paths for step in "ud"]
        entries += [NodeEntry(p, t, p[:-1] or "root", HALF) for p in paths]
    return build_tree(entries, dim)


def random_market(seed, widen=0):
    """Currency values follow multiplicative martingales; quotes add a proportional cost on top.

    The values S (in units of currency 1) are then a consistent price system,
    so every generated market is free of arbitrage.
    """
    dim, horizon = SHAPES[seed % len(SHAPES)]
    rng = random.Random(seed)
    tree = binary_tree(horizon, dim)
    value = {"root": (F(1),) + tuple(F(rng.randint(1, 9), 10) for _ in range(dim - 1))}
    for t in range(horizon):
        for node_id in tree.atoms(t):
            moves = [F(rng.choice([-1, 1]) * rng.randint(1, 4), 10) for _ in range(dim - 1)]
            up, down = tree.children(node_id)
            s = value[node_id]
            value[up] = (F(1),) + tuple(x * (1 + a) for x, a in zip(s[1:], moves))
            value[down] = (F(1),) + tuple(x * (1 - a) for x, a in zip(s[1:], moves))
    rates = {}
    for node_id in tree.node_ids():
        s = value[node_id]
        rates[node_id] = [[F(1) if j == k else s[k] / s[j] * (1 + F(rng.randint(0, 4), 20) + F(widen, 10))
                           for k in range(dim)] for j in range(dim)]
    rates = validate_rates(tree, rates)
    cones = deferred_cones(tree, rates)
    Y = {i: vec([F(rng.randint(0, 2), 4) for _ in range(dim - 1)] + [rng.randint(0, 6)]) for i in tree.node_ids()}
    X = {i: add(y, mul(rng.randint(0, 3), unit(dim, dim - 1))) for i, y in Y.items()}
    return tree, cones, GamePayoffs(AdaptedProcess(Y), AdaptedProcess(X))


def shifted(payoffs, bump):
    """Adds bump[node] to both payoffs, which leaves X − Y unchanged."""
    return GamePayoffs(AdaptedProcess({i: add(v, bump[i]) for i, v in payoffs.Y.values.items()}),
                       AdaptedProcess({i: add(v, bump[i]) for i, v in payoffs.X.values.items()}))


def prices(tree, cones, payoffs):
    """Bid and ask in the last currency."""
    j = tree.dim - 1
    seller = build_ladder(tree, cones, payoffs, Side.SELLER)
    buyer = build_ladder(tree, cones, payoffs, Side.BUYER)
    return bid_price(buyer, j), ask_price(seller, j)


@pytest.mark.slow
@pytest.mark.parametrize("seed", SWEEP)
class TestPriceAxioms:
    def test_order_and_homogeneity(self, seed):
        tree, cones, payoffs = random_market(seed)
        bid, ask = prices(tree, cones, payoffs)
        assert bid <= ask
        assert prices(tree, cones, payoffs.scaled(F(3))) == (3 * bid, 3 * ask)

    def test_monotone_in_payoff(self, seed):
        rng = random.Random(seed + 1000)
        tree, cones, payoffs = random_market(seed)
        bid, ask = prices(tree, cones, payoffs)
        bump = {i: mul(F(rng.randint(0, 2), 4), unit(tree.dim, 0)) for i in tree.node_ids()}
        more_bid, more_ask = prices(tree, cones, shifted(payoffs, bump))
        assert more_bid >= bid and more_ask >= ask


@pytest.mark.slow
@pytest.mark.parametrize("seed", SEEDS)
class TestRandomMarkets:
    def test_shape(self, seed):
        tree, _, _ = random_market(seed)
        assert (tree.dim, tree.horizon) == SHAPES[seed % len(SHAPES)]
        assert len(tree.leaves()) == 2 ** tree.horizon

    def test_market_is_arbitrage_free(self, seed):
        tree, cones, _ = random_market(seed)
        assert check_no_arbitrage(tree, cones).arbitrage_free

    def test_cash_shift(self, seed):
        tree, cones, payoffs = random_market(seed)
        bid, ask = prices(tree, cones, payoffs)
        cash = {i: unit(tree.dim, tree.dim - 1) for i in tree.node_ids()}
        assert prices(tree, cones, shifted(payoffs, cash)) == (bid + 1, ask + 1)

    def test_wider_spreads_widen_prices(self, seed):
        tree, narrow, payoffs = random_market(seed)
        _, wide, _ = random_market(seed, widen=1)
        assert cone_monotone(wide, narrow)
        bid, ask = prices(tree, narrow, payoffs)
        wide_bid, wide_ask = prices(tree, wide, payoffs)
        assert wide_bid <= bid and ask <= wide_ask

    def test_seller_hedge_at_ask_verifies(self, seed):
        tree, cones, payoffs = random_market(seed)
        j = tree.dim - 1
        ladder = build_ladder(tree, cones, payoffs, Side.SELLER)
        initial = mul(ask_price(ladder, j), unit(tree.dim, j))
        hedge = extract_lambda_hedge(tree, cones, payoffs, ladder, initial)
        recipe = lambda_to_full_hedge(tree, cones, payoffs, hedge)
        assert verify_hedge(tree, cones, payoffs, recipe, mst_grid(tree, 2)).passed


@pytest.mark.parametrize("seed", SWEEP)
class TestRandomStoppingTimes:
    def test_flow_matches_total(self, seed):
        rng = random.Random(seed)
        tree, _, payoffs = random_market(seed)
        grid = list(mst_grid(tree, 3))
        phi, psi = rng.choice(grid), rng.choice(grid)
        totals = q_total(tree, payoffs, phi, psi)
        for leaf in tree.leaves():
            flow = vsum((payoff_G(tree, payoffs, phi, psi, i) for i in tree.path(leaf)), tree.dim)
            assert flow == totals[leaf]

    def test_min_is_a_stopping_time(self, seed):
        rng = random.Random(seed)
        tree = binary_tree(2)
        grid = list(mst_grid(tree, 4))
        m = mst_min(tree, rng.choice(grid), rng.choice(grid))
        for leaf in tree.leaves():
            assert sum(m[i] for i in tree.path(leaf)) == 1

    def test_min_of_constant_times(self, seed):
        tree = binary_tree(2)
        s, t = seed % 3, (seed // 3) % 3
        assert mst_min(tree, deterministic(tree, s), deterministic(tree, t)).values == \
            deterministic(tree, min(s, t)).values


@pytest.mark.slow
@pytest.mark.parametrize("seed", SWEEP)
class TestRandomPolyhedra:
    def random_polytope(self, rng, dim=2, count=6):
        points = [tuple(F(rng.randint(-20, 20), rng.randint(1, 4)) for _ in range(dim)) for _ in range(count)]
        return points, Polyhedron.from_generators(dim, points)

    def test_double_description_round_trip(self, seed):
        rng = random.Random(seed)
        _, p = self.random_polytope(rng, dim=rng.choice([2, 3]))
        back = Polyhedron.from_halfspaces(p.dim, [(h.normal, h.offset) for h in p.halfspaces])
        assert equal(p, back)
        assert set(convert(back).points) == set(convert(p).points)

    def test_membership_agrees(self, seed):
        rng = random.Random(seed)
        _, p = self.random_polytope(rng)
        for _ in range(5):
            x = vec([F(rng.randint(-25, 25), 2), F(rng.randint(-25, 25), 2)])
            assert p.contains(x) == contains_by_generators(p, x)

    def test_lp_matches_vertex_enumeration(self, seed):
        rng = random.Random(seed)
        points, p = self.random_polytope(rng, dim=rng.choice([2, 3]))
        c = vec([rng.randint(-5, 5) for _ in range(p.dim)])
        sol = lp_solve(LpProblem(objective=c, rows=[(h.normal, h.offset) for h in p.halfspaces]))
        assert sol.optimal
        assert sol.value == min(dot(c, v) for v in points)

    def test_halfspace_round_trip_unbounded(self, seed):
        rng = random.Random(seed)
        dim = rng.choice([2, 3])
        rows = []
        count = rng.randint(1, 4)
        while len(rows) < count:
            a = [rng.randint(-3, 3) for _ in range(dim)]
            if any(a):
                rows.append((a, rng.randint(-5, 5)))
        p = Polyhedron.from_halfspaces(dim, rows)
        samples = [vec([F(rng.randint(-12, 12), 2) for _ in range(dim)]) for _ in range(5)]
        if p.is_empty():
            assert not any(contains_by_generators(p, x) for x in samples)
            return
        back = Polyhedron.from_generators(dim, p.points, p.rays)
        assert equal(p, back)
        for x in samples:
            assert p.contains(x) == back.contains(x) == contains_by_generators(p, x)

    def test_generator_round_trip_unbounded(self, seed):
        rng = random.Random(seed)
        dim = rng.choice([2, 3])
        points = [vec([rng.randint(-6, 6) for _ in range(dim)]) for _ in range(rng.randint(1, 4))]
        rays = [vec([rng.randint(-2, 2) for _ in range(dim)]) for _ in range(rng.randint(1, 3))]
        p = Polyhedron.from_generators(dim, points, rays)
        back = Polyhedron.from_halfspaces(dim, [(h.normal, h.offset) for h in p.halfspaces])
        assert equal(p, back)
        assert set(convert(back).points) == set(convert(p).points)
        assert set(convert(back).rays) == set(convert(p).rays)
