# test_dual.py

from dataclasses import replace
from fractions import Fraction

import pytest

from conftest import MODELS, one_step_market
from engine.dual import (
    american_dual_price, buyer_dual_price, certify, pair_feasible, pair_value, price_system_holds,
    seller_dual_price, to_price_system,
)
from engine.errors import ArbitrageError
from engine.pricing import Side
from engine.stopping import deterministic, q_seller_process
from engine.tree import AdaptedProcess
from engine.vectors import vec
from tools.model_io import load_model

F = Fraction
ASK, BID = F(14, 3), F(11, 3)


@pytest.fixture(scope="module")
def seller_report(fig1, seller_hedge):
    return seller_dual_price(fig1.tree, fig1.cones, fig1.payoffs, 1, n=2,
                             outer=[seller_hedge.stopping], primal=ASK)


class TestWeakDuality:
    def test_seller_values_stay_below_ask(self, seller_report, seller_hedge):
        values = seller_report.inner_values(seller_hedge.stopping)
        assert values and all(v <= ASK for v in values)

    def test_buyer_values_stay_above_bid(self, fig1, buyer_hedge):
        report = buyer_dual_price(fig1.tree, fig1.cones, fig1.payoffs, 1, n=2,
                                  outer=[buyer_hedge.stopping], primal=BID)
        assert all(v >= BID for v in report.inner_values(buyer_hedge.stopping))

    def test_zero_payoff(self, zero_model):
        tree = zero_model.tree
        report = seller_dual_price(tree, zero_model.cones, zero_model.payoffs, 1, n=2,
                                   outer=[deterministic(tree, 2)], primal=F(0))
        assert report.value == 0
        assert report.gap == 0


class TestPairs:
    def test_best_pair_is_feasible(self, fig1, seller_report, seller_hedge):
        pair = seller_report.best[seller_hedge.stopping.key()]
        assert pair_feasible(fig1.tree, fig1.cones, pair)
        assert certify(fig1.tree, fig1.cones, pair, fig1.payoffs, Side.SELLER, ASK)

    def test_value_resubstitutes(self, fig1, seller_hedge):
        Z = q_seller_process(fig1.tree, fig1.payoffs, seller_hedge.stopping)
        value, pair, entries = american_dual_price(fig1.tree, fig1.cones, Z, 1,
                                                   candidates=[deterministic(fig1.tree, 2)])
        assert pair_value(fig1.tree, Z, pair) == value
        assert len(entries) == 1

    def test_corrupted_pair_fails(self, fig1, seller_report, seller_hedge):
        pair = seller_report.best[seller_hedge.stopping.key()]
        bad = replace(pair, m={**pair.m, "root": vec([0, 2])})
        assert not pair_feasible(fig1.tree, fig1.cones, bad)
        assert not certify(fig1.tree, fig1.cones, bad, fig1.payoffs, Side.SELLER, ASK)

    def test_price_system(self, fig1, seller_report, seller_hedge):
        pair = seller_report.best[seller_hedge.stopping.key()]
        q, S = to_price_system(fig1.tree, pair)
        assert q["root"] == 1
        assert all(s[1] == 1 for s in S.values())
        assert price_system_holds(fig1.tree, fig1.cones, pair)

    def test_arbitrage_has_no_dual(self):
        model = load_model(MODELS / "arbitrage.json")
        with pytest.raises(ArbitrageError):
            american_dual_price(model.tree, model.cones, model.payoffs.Y, 1,
                                candidates=[deterministic(model.tree, 1)])


class TestFrictionlessOneStep:
    @pytest.mark.parametrize("now,price", [((0, 5), 6), ((0, 7), 7)])
    def test_american_claim_matches_replication(self, now, price):
        # holding 3 units of currency 1 against 24 of currency 2 replicates (1,0) at w1
        tree, cones, _ = one_step_market(10, [8, 12])
        Z = AdaptedProcess({"root": vec(now), "w0": vec([0, 0]), "w1": vec([1, 0])})
        value, pair, _ = american_dual_price(tree, cones, Z, 1, n=4)
        assert value == price
        assert pair_feasible(tree, cones, pair)

    def test_replication_measure_is_unique(self):
        tree, cones, _ = one_step_market(10, [8, 12])
        Z = AdaptedProcess({"root": vec([0, 0]), "w0": vec([0, 0]), "w1": vec([1, 0])})
        _, pair, _ = american_dual_price(tree, cones, Z, 1, candidates=[deterministic(tree, 1)])
        q, S = to_price_system(tree, pair)
        assert q == {"root": 1, "w0": F(1, 2), "w1": F(1, 2)}
        assert S["w1"] == vec([12, 1])

    @pytest.mark.parametrize("c", [0, 3, F(5, 2)])
    def test_cash_payoff_prices_at_face_value(self, c):
        tree, cones, payoffs = one_step_market(10, [9, 11], payoff=(0, c))
        seller = seller_dual_price(tree, cones, payoffs, 1, n=2)
        buyer = buyer_dual_price(tree, cones, payoffs, 1, n=2)
        assert seller.value == c == buyer.value
        assert all(e.value == c for e in seller.entries + buyer.entries)


@pytest.mark.slow
class TestOuterGrid:
    def test_seller_takes_minimum_over_own_times(self, fig1):
        report = seller_dual_price(fig1.tree, fig1.cones, fig1.payoffs, 1, n=2, primal=ASK)
        maxima = {key: pair.value for key, pair in report.best.items()}
        assert len(maxima) == 14
        assert report.value == min(maxima.values())
        assert report.value == max(report.inner_values(report.argument))
        pair = report.best[report.argument.key()]
        assert certify(fig1.tree, fig1.cones, pair, fig1.payoffs, Side.SELLER, report.value)

    def test_buyer_takes_maximum_over_own_times(self, fig1, buyer_hedge):
        report = buyer_dual_price(fig1.tree, fig1.cones, fig1.payoffs, 1, n=2, primal=BID)
        minima = {key: pair.value for key, pair in report.best.items()}
        assert report.value == max(minima.values())
        assert report.value >= minima[buyer_hedge.stopping.key()] >= BID


@pytest.mark.slow
class TestPrimalDualAgreement:
    def test_seller_on_fine_grid(self, fig1, seller_hedge):
        report = seller_dual_price(fig1.tree, fig1.cones, fig1.payoffs, 1, n=8,
                                   outer=[seller_hedge.stopping], primal=ASK)
        values = report.inner_values(seller_hedge.stopping)
        assert max(values) == ASK
        assert report.gap == 0

    def test_buyer_on_fine_grid(self, fig1, buyer_hedge):
        report = buyer_dual_price(fig1.tree, fig1.cones, fig1.payoffs, 1, n=8,
                                  outer=[buyer_hedge.stopping], primal=BID)
        values = report.inner_values(buyer_hedge.stopping)
        assert min(values) == BID
        assert report.gap == 0
        pair = report.best[buyer_hedge.stopping.key()]
        assert certify(fig1.tree, fig1.cones, pair, fig1.payoffs, Side.BUYER, BID)
