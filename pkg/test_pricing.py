# test_pricing.py

from fractions import Fraction

import pytest

from conftest import MODELS, one_step_market
from engine.errors import ArbitrageError
from engine.pricing import Side, ask_price, bid_price, build_ladder
from engine.polyhedra import Polyhedron, equal, subset
from tools.model_io import load_model

F = Fraction


def halfplanes(*rows):
    return Polyhedron.from_halfspaces(2, rows)


class TestSellerLadder:
    def test_leaf_sets(self, seller_ladder):
        assert equal(seller_ladder["uu"].Z, halfplanes(((14, 1), 9)))
        assert equal(seller_ladder["dd"].Z, halfplanes(((4, 1), 0)))

    def test_up_node(self, seller_ladder):
        expected = halfplanes(((14, 1), 6), ((F(58, 5), 1), 6), ((10, 1), 4))
        assert equal(seller_ladder["u"].Z, expected)

    def test_down_node(self, seller_ladder):
        assert equal(seller_ladder["d"].Z, halfplanes(((6, 1), F(4, 3))))

    def test_root(self, seller_ladder):
        assert equal(seller_ladder.Z0, halfplanes(((10, 1), F(14, 3))))

    def test_nesting(self, fig1, seller_ladder):
        for node_id in fig1.tree.non_leaves():
            sets = seller_ladder[node_id]
            assert subset(sets.W, sets.V)
            assert subset(sets.Z, sets.Y)
            assert subset(sets.Z, sets.conv)


class TestBuyerLadder:
    def test_up_node(self, buyer_ladder):
        assert equal(buyer_ladder["u"].Z, halfplanes(((14, 1), -6), ((10, 1), -4)))

    def test_down_node(self, buyer_ladder):
        assert equal(buyer_ladder["d"].Z, halfplanes(((6, 1), F(-4, 3))))

    def test_root(self, buyer_ladder):
        assert equal(buyer_ladder.Z0, halfplanes(((10, 1), F(-11, 3))))

    def test_nesting(self, fig1, buyer_ladder):
        for node_id in fig1.tree.non_leaves():
            sets = buyer_ladder[node_id]
            assert subset(sets.VX, sets.V)
            assert subset(sets.VX, sets.Z)
            assert subset(sets.Y, sets.Z)


class TestPrices:
    def test_worked_example(self, seller_ladder, buyer_ladder):
        assert ask_price(seller_ladder, 1) == F(14, 3)
        assert bid_price(buyer_ladder, 1) == F(11, 3)

    def test_inside_instant_exercise_spread(self, seller_ladder, buyer_ladder):
        # gradual play narrows the all-or-nothing spread [3.2, 5]
        assert 3.2 <= bid_price(buyer_ladder, 1) and ask_price(seller_ladder, 1) <= 5

    def test_first_currency(self, seller_ladder, buyer_ladder):
        assert ask_price(seller_ladder, 0) == F(7, 15)
        assert bid_price(buyer_ladder, 0) == F(11, 30)

    def test_bid_below_ask(self, seller_ladder, buyer_ladder):
        for j in (0, 1):
            assert bid_price(buyer_ladder, j) <= ask_price(seller_ladder, j)

    def test_zero_payoffs(self, zero_model):
        tree, cones, payoffs = zero_model.tree, zero_model.cones, zero_model.payoffs
        seller = build_ladder(tree, cones, payoffs, Side.SELLER)
        buyer = build_ladder(tree, cones, payoffs, Side.BUYER)
        assert equal(seller.Z0, cones.Q[tree.root])
        assert equal(buyer.Z0, cones.Q[tree.root])
        assert ask_price(seller, 1) == 0
        assert bid_price(buyer, 1) == 0

    def test_homogeneity(self, fig1):
        doubled = fig1.payoffs.scaled(F(2))
        seller = build_ladder(fig1.tree, fig1.cones, doubled, Side.SELLER)
        buyer = build_ladder(fig1.tree, fig1.cones, doubled, Side.BUYER)
        assert ask_price(seller, 1) == F(28, 3)
        assert bid_price(buyer, 1) == F(22, 3)

    def test_constant_payoff_is_cash(self):
        tree, cones, payoffs = one_step_market(10, [9, 11], payoff=(0, 3))
        seller = build_ladder(tree, cones, payoffs, Side.SELLER)
        buyer = build_ladder(tree, cones, payoffs, Side.BUYER)
        assert ask_price(seller, 1) == 3 == bid_price(buyer, 1)
        assert ask_price(seller, 0) == F(3, 10)

    @pytest.mark.parametrize("side", [Side.SELLER, Side.BUYER])
    def test_arbitrage_model(self, side):
        model = load_model(MODELS / "arbitrage.json")
        with pytest.raises(ArbitrageError):
            ladder = build_ladder(model.tree, model.cones, model.payoffs, side)
            if side is Side.SELLER:
                ask_price(ladder, 1)
            else:
                bid_price(ladder, 1)
