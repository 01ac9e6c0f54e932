# runner.py

import argparse
import logging
import sys
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from engine import config
from engine.dual import buyer_dual_price, seller_dual_price
from engine.errors import ArbitrageError, GameOptionError, InfeasibleInitialError, ModelError
from engine.hedging import describe_stopping, extract_lambda_hedge, lambda_to_full_hedge, verify_hedge
from engine.market import certificate_holds, check_no_arbitrage, witness_holds
from engine.pricing import Side, ask_price, bid_price, build_ladder
from engine.stopping import instant_only, mst_grid
from engine.vectors import Vector, fmt, mul, unit
from tools.model_io import (
    MarketModel, arbitrage_report_to_file, dual_report_to_file, dump_json, load_model, load_recipe,
    save_recipe, verify_report_to_file, write_json,
)
from tools.plotting import FigureSpec, save_svg

logger = logging.getLogger("runner")

SET_NAMES = ("Y", "X", "W", "V", "conv", "VX", "Z")


# 1. Environment and logging
def setup_environment(level: Optional[str] = None) -> None:
    """Configures logging from --log-level or GAMEOPT_LOG_LEVEL and reports the effective settings."""
    logging.basicConfig(
        level=(level or config.LOG_LEVEL).upper(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    logger.debug("dual grid 1/%d, verify grid 1/%d, grid guard %d",
                 config.DUAL_GRID, config.VERIFY_GRID, config.MAX_GRID_POINTS)


# 2. Argument helpers
def _parse_vector(text: str, dim: Optional[int] = None) -> Vector:
    try:
        v = tuple(Fraction(x.strip()) for x in text.split(","))
    except (ValueError, ZeroDivisionError) as e:
        raise ModelError(f"'{text}' is not a comma-separated list of rationals") from e
    if dim is not None and len(v) != dim:
        raise ModelError(f"'{text}' has {len(v)} entries, the model has {dim} currencies")
    return v


def _parse_range(text: str) -> Tuple[Fraction, Fraction]:
    lo, hi = _parse_vector(text, 2)
    return lo, hi


def _currency(model: MarketModel, j: int) -> int:
    if not 1 <= j <= model.tree.dim:
        raise ModelError(f"currency {j} outside 1..{model.tree.dim}")
    return j - 1


def _require_no_arbitrage(model: MarketModel) -> None:
    report = check_no_arbitrage(model.tree, model.cones)
    if not report.arbitrage_free:
        raise ArbitrageError("no consistent price system exists; the model admits arbitrage")


def _decimal(x: Fraction) -> str:
    return "%.6f" % float(x)


# 3. Commands
def cmd_price(args) -> int:
    model = load_model(args.model)
    _require_no_arbitrage(model)
    j = _currency(model, args.currency)
    exact, approx = [], []
    if args.side in ("bid", "both"):
        bid = bid_price(build_ladder(model.tree, model.cones, model.payoffs, Side.BUYER), j)
        exact.append(f"bid {fmt(bid)}")
        approx.append(f"bid {_decimal(bid)}")
    if args.side in ("ask", "both"):
        ask = ask_price(build_ladder(model.tree, model.cones, model.payoffs, Side.SELLER), j)
        exact.append(f"ask {fmt(ask)}")
        approx.append(f"ask {_decimal(ask)}")
    print(" ".join(exact))
    print("≈ " + " ".join(approx))
    return 0


def _hedge(model: MarketModel, side: Side, j: int, initial: Optional[Vector]):
    ladder = build_ladder(model.tree, model.cones, model.payoffs, side)
    if initial is None:
        price = ask_price(ladder, j) if side is Side.SELLER else bid_price(ladder, j)
        # the buyer's position at the bid is the debt −bid·e^j
        initial = mul(price if side is Side.SELLER else -price, unit(model.tree.dim, j))
    hedge = extract_lambda_hedge(model.tree, model.cones, model.payoffs, ladder, initial)
    return ladder, hedge


def cmd_hedge(args) -> int:
    model = load_model(args.model)
    _require_no_arbitrage(model)
    side = Side(args.side)
    j = _currency(model, args.currency)
    initial = _parse_vector(args.initial, model.tree.dim) if args.initial else None
    _, hedge = _hedge(model, side, j, initial)
    recipe = lambda_to_full_hedge(model.tree, model.cones, model.payoffs, hedge)
    summary = describe_stopping(model.tree, hedge)
    save_recipe(args.out, recipe, summary)
    print(f"✅ {side.value} recipe written to {args.out}")
    for line in summary:
        print("  " + line)
    return 0


def cmd_verify(args) -> int:
    model = load_model(args.model)
    recipe = load_recipe(args.recipe, model.tree)
    grid = args.grid or config.VERIFY_GRID
    opponents = list(mst_grid(model.tree, grid))
    if args.instant_only:
        opponents = instant_only(opponents)
    report = verify_hedge(model.tree, model.cones, model.payoffs, recipe, opponents)
    doc = verify_report_to_file(report, grid)
    if args.out:
        write_json(args.out, doc)
    else:
        sys.stdout.write(dump_json(doc))
    if report.passed:
        print(f"✅ {recipe.side.value} recipe holds against {report.opponents} opponents (grid 1/{grid})",
              file=sys.stderr)
        return 0
    print(f"❌ {len(report.violations)} violations, {len(report.nonanticipation)} anticipation failures",
          file=sys.stderr)
    return 1


def cmd_dual_check(args) -> int:
    model = load_model(args.model)
    _require_no_arbitrage(model)
    j = _currency(model, args.currency)
    grid = args.grid or config.DUAL_GRID
    tree, cones, payoffs = model.tree, model.cones, model.payoffs
    gaps = []
    reports = []
    if args.side in ("ask", "both"):
        ladder, hedge = _hedge(model, Side.SELLER, j, None)
        ask = ask_price(ladder, j)
        outer = None if args.full else [hedge.stopping]
        report = seller_dual_price(tree, cones, payoffs, j, grid, outer=outer, primal=ask)
        worst = max(report.inner_values(report.argument))
        print(f"ask {fmt(ask)}: dual grid value {fmt(report.value)}, inner maximum {fmt(worst)}")
        gaps.append(f"ask gap {fmt(report.gap)}")
        reports.append(report)
    if args.side in ("bid", "both"):
        ladder, hedge = _hedge(model, Side.BUYER, j, None)
        bid = bid_price(ladder, j)
        outer = None if args.full else [hedge.stopping]
        report = buyer_dual_price(tree, cones, payoffs, j, grid, outer=outer, primal=bid)
        best = min(report.inner_values(report.argument))
        print(f"bid {fmt(bid)}: dual grid value {fmt(report.value)}, inner minimum {fmt(best)}")
        gaps.append(f"bid gap {fmt(report.gap)}")
        reports.append(report)
    print(", ".join(gaps))
    if args.out:
        for report in reports:
            write_json(f"{args.out}.{report.side.value}.json", dual_report_to_file(report))
    return 0


def cmd_arb_check(args) -> int:
    model = load_model(args.model)
    report = check_no_arbitrage(model.tree, model.cones)
    if args.out:
        write_json(args.out, arbitrage_report_to_file(report))
    if report.arbitrage_free:
        ok = certificate_holds(model.tree, model.cones, report.certificate)
        print(f"{'✅' if ok else '❌'} no-arbitrage, certificate emitted")
        return 0 if ok else 1
    ok = witness_holds(model.tree, model.cones, report.witness, report.surplus)
    print(f"{'⚠️ ' if ok else '❌'} arbitrage, witness emitted")
    return ArbitrageError.exit_code


def cmd_plot(args) -> int:
    model = load_model(args.model)
    if model.tree.dim != 2:
        raise ModelError(f"plots need exactly two currencies, the model has {model.tree.dim}")
    if args.node not in model.tree:
        raise ModelError(f"unknown node '{args.node}'")
    names = [s.strip() for s in args.sets.split(",") if s.strip()] if args.sets else []
    unknown = [n for n in names if n not in SET_NAMES]
    if unknown:
        raise ModelError(f"unknown set names {unknown}; choose from {', '.join(SET_NAMES)}")
    sets = []
    if names:
        ladder = build_ladder(model.tree, model.cones, model.payoffs, Side(args.side))
        node_sets = ladder[args.node]
        for name in names:
            p = getattr(node_sets, name)
            if p is None:
                raise ModelError(f"set '{name}' is not defined at '{args.node}' for the {args.side}")
            sets.append((name, p))
    marks = []
    for k, text in enumerate(args.mark or []):
        label, _, coords = text.rpartition("=")
        marks.append((label or f"m{k + 1}", _parse_vector(coords, 2)))
    figure = FigureSpec(node=args.node, sets=sets, marks=marks,
                      title=f"{args.side} sets at {args.node}")
    if args.xrange:
        figure.xrange = _parse_range(args.xrange)
    if args.yrange:
        figure.yrange = _parse_range(args.yrange)
    save_svg(args.out, figure)
    print(f"✅ figure written to {args.out}")
    return 0


# 4. Parser and entry point
class CliParser(argparse.ArgumentParser):
    """Reports usage errors with the malformed-input exit code."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"❌ {self.prog}: {message}", file=sys.stderr)
        sys.exit(ModelError.exit_code)


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog="runner.py",
                       description="Exact pricing and hedging of game options under transaction costs.")
    parser.add_argument("--log-level", default=None, help="Overrides GAMEOPT_LOG_LEVEL.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("price", help="Bid and ask prices in one currency.")
    p.add_argument("--model", required=True)
    p.add_argument("--currency", type=int, required=True)
    p.add_argument("--side", choices=("ask", "bid", "both"), default="both")
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("hedge", help="Extract a superhedge and write its recipe.")
    p.add_argument("--model", required=True)
    p.add_argument("--currency", type=int, required=True)
    p.add_argument("--side", choices=("seller", "buyer"), required=True)
    p.add_argument("--initial", help="Initial portfolio 'x1,x2,...'; defaults to the price in --currency.")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hedge)

    p = sub.add_parser("verify", help="Check a recipe against a grid of opponent stopping times.")
    p.add_argument("--model", required=True)
    p.add_argument("--recipe", required=True)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--instant-only", action="store_true", help="Restrict opponents to ordinary stopping times.")
    p.add_argument("--out", help="Report path; stdout when omitted.")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("dual-check", help="Compare primal prices with grid dual values.")
    p.add_argument("--model", required=True)
    p.add_argument("--currency", type=int, required=True)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--side", choices=("ask", "bid", "both"), default="both")
    p.add_argument("--full", action="store_true", help="Also search the outer stopping time over the grid.")
    p.add_argument("--out", help="Report path prefix.")
    p.set_defaults(func=cmd_dual_check)

    p = sub.add_parser("arb-check", help="Certify no-arbitrage or exhibit an arbitrage.")
    p.add_argument("--model", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_arb_check)

    p = sub.add_parser("plot", help="SVG figure of the sets at one node (two currencies only).")
    p.add_argument("--model", required=True)
    p.add_argument("--node", required=True)
    p.add_argument("--sets", default="", help=f"Comma-separated subset of {','.join(SET_NAMES)}.")
    p.add_argument("--side", choices=("seller", "buyer"), default="seller")
    p.add_argument("--mark", action="append", help="Marker 'label=x1,x2' (repeatable).")
    p.add_argument("--xrange")
    p.add_argument("--yrange")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_environment(args.log_level)
    try:
        return args.func(args)
    except InfeasibleInitialError as e:
        where = f"; violated {e.halfspace}" if e.halfspace else ""
        print(f"❌ {e}{where}", file=sys.stderr)
        return e.exit_code
    except GameOptionError as e:
        print(f"❌ {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
