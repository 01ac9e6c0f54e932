# conftest.py

from fractions import Fraction
from pathlib import Path

import pytest

from engine.hedging import extract_lambda_hedge, lambda_to_full_hedge
from engine.market import deferred_cones, validate_rates
from engine.pricing import Side, build_ladder
from engine.stopping import GamePayoffs
from engine.tree import AdaptedProcess, NodeEntry, build_tree
from engine.vectors import vec
from tools.model_io import load_model

MODELS = Path(__file__).parent / "models"


def frictionless(rate) -> tuple:
    """Rate matrix for one unit of currency 1 costing `rate` units of currency 2, both ways."""
    rate = Fraction(rate)
    return ((Fraction(1), 1 / rate), (rate, Fraction(1)))


def spread(bid, ask) -> tuple:
    """Currency 1 sells for `bid` and buys for `ask` units of currency 2."""
    return ((Fraction(1), 1 / Fraction(bid)), (Fraction(ask), Fraction(1)))


def one_step_market(root_rate, leaf_rates, payoff=(0, 0)):
    """Frictionless one-step tree with equally likely leaves and a constant payoff."""
    leaves = [f"w{k}" for k in range(len(leaf_rates))]
    entries = [NodeEntry("root", 0, None)]
    entries += [NodeEntry(leaf, 1, "root", Fraction(1, len(leaves))) for leaf in leaves]
    tree = build_tree(entries, 2)
    rates = {"root": frictionless(root_rate)}
    rates.update({leaf: frictionless(r) for leaf, r in zip(leaves, leaf_rates)})
    rates = validate_rates(tree, rates)
    cones = deferred_cones(tree, rates)
    flat = AdaptedProcess({i: vec(payoff) for i in tree.node_ids()})
    return tree, cones, GamePayoffs(flat, flat)


@pytest.fixture(scope="session")
def fig1():
    return load_model(MODELS / "fig1.json")


@pytest.fixture(scope="session")
def zero_model():
    return load_model(MODELS / "zero_payoff.json")


@pytest.fixture(scope="session")
def seller_ladder(fig1):
    return build_ladder(fig1.tree, fig1.cones, fig1.payoffs, Side.SELLER)


@pytest.fixture(scope="session")
def buyer_ladder(fig1):
    return build_ladder(fig1.tree, fig1.cones, fig1.payoffs, Side.BUYER)


@pytest.fixture(scope="session")
def seller_hedge(fig1, seller_ladder):
    return extract_lambda_hedge(fig1.tree, fig1.cones, fig1.payoffs, seller_ladder, vec([0, "14/3"]))


@pytest.fixture(scope="session")
def buyer_hedge(fig1, buyer_ladder):
    return extract_lambda_hedge(fig1.tree, fig1.cones, fig1.payoffs, buyer_ladder, vec([0, "-11/3"]))


@pytest.fixture(scope="session")
def seller_recipe(fig1, seller_hedge):
    return lambda_to_full_hedge(fig1.tree, fig1.cones, fig1.payoffs, seller_hedge)


@pytest.fixture(scope="session")
def buyer_recipe(fig1, buyer_hedge):
    return lambda_to_full_hedge(fig1.tree, fig1.cones, fig1.payoffs, buyer_hedge)
