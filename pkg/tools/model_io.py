# tools/model_io.py

import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, Mapping, Optional, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from engine.dual import DualReport
from engine.errors import ModelError
from engine.hedging import HedgeRecipe, LambdaHedge, VerifyReport
from engine.market import ArbitrageReport, ConeField, RateMatrix, deferred_cones, validate_rates
from engine.pricing import Side
from engine.stopping import GamePayoffs, MixedStoppingTime, validate_mst
from engine.tree import EventTree, NodeEntry, PredictableProcess, build_tree, process_from_rows
from engine.vectors import Vector, fmt

from .schemas import (
    ArbitrageReportFile, DualEntryFile, DualReportFile, LiquidationFile, ModelFile, ProcessFile,
    RecipeFile, StoppingFile, VerifyReportFile, ViolationEntry,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
M = TypeVar("M", bound=BaseModel)


@dataclass
class MarketModel:
    """Everything a command needs from a model file."""
    tree: EventTree
    rates: Dict[str, RateMatrix]
    cones: ConeField
    payoffs: GamePayoffs


# --- JSON helpers ---

def _describe_validation(e: ValidationError) -> str:
    first = e.errors()[0]
    where = ".".join(str(p) for p in first["loc"]) or "<root>"
    return f"{where}: {first['msg']}"


def read_json(path: PathLike, schema: Type[M]) -> M:
    """Parses `path` into `schema`, turning every failure into ModelError."""
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ModelError(f"cannot read {path}: {e.strerror}") from e
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ModelError(f"{path} is not valid JSON: {e.msg} (line {e.lineno})") from e
    try:
        return schema.model_validate(data)
    except ValidationError as e:
        raise ModelError(f"{path}: {_describe_validation(e)}") from e


def dump_json(doc: BaseModel) -> str:
    """Byte-deterministic rendering: aliases, sorted keys, two-space indent."""
    return json.dumps(doc.model_dump(by_alias=True, mode="json"), indent=2, sort_keys=True) + "\n"


def write_json(path: PathLike, doc: BaseModel) -> None:
    Path(path).write_text(dump_json(doc), encoding="utf-8")
    logger.info("wrote %s", path)


def _frac(s: str) -> Fraction:
    return Fraction(s)


def _fvec(v) -> Vector:
    return tuple(Fraction(x) for x in v)


def _svec(v) -> list:
    return [fmt(x) for x in v]


# --- models ---

def model_from_file(doc: ModelFile) -> MarketModel:
    entries = [NodeEntry(n.id, n.time, n.parent, _frac(n.branch_prob)) for n in doc.nodes]
    tree = build_tree(entries, doc.d)
    rates = validate_rates(tree, {n.id: [[_frac(x) for x in row] for row in n.pi] for n in doc.nodes})
    cones = deferred_cones(tree, rates)
    payoffs = GamePayoffs(process_from_rows(tree, {n.id: n.Y for n in doc.nodes}),
                          process_from_rows(tree, {n.id: n.X for n in doc.nodes}))
    payoffs.validate(tree, cones.K)
    return MarketModel(tree, rates, cones, payoffs)


def load_model(path: PathLike) -> MarketModel:
    """Reads, validates and prepares a model file (tree, rates, cones, payoffs)."""
    model = model_from_file(read_json(path, ModelFile))
    logger.info("loaded %s: %d nodes, d=%d, T=%d", path, len(model.tree), model.tree.dim, model.tree.horizon)
    return model


# --- processes ---

def stopping_to_file(phi: MixedStoppingTime) -> StoppingFile:
    return StoppingFile(values={i: fmt(v) for i, v in sorted(phi.values.items())})


def stopping_from_file(tree: EventTree, doc: StoppingFile) -> MixedStoppingTime:
    return validate_mst(tree, {i: _frac(v) for i, v in doc.values.items()})


def process_to_file(y: PredictableProcess) -> ProcessFile:
    return ProcessFile(initial=_svec(y.initial), values={i: _svec(v) for i, v in sorted(y.values.items())})


def process_from_file(doc: ProcessFile) -> PredictableProcess:
    return PredictableProcess(_fvec(doc.initial), {i: _fvec(v) for i, v in doc.values.items()})


def _liquidations(family: Mapping[str, PredictableProcess]):
    return [LiquidationFile(node=i, **process_to_file(y).model_dump()) for i, y in sorted(family.items())]


# --- recipes ---

def recipe_to_file(recipe: HedgeRecipe, summary=()) -> RecipeFile:
    return RecipeFile(
        side=recipe.side.value,
        stopping=stopping_to_file(recipe.hedge.stopping),
        backbone=process_to_file(recipe.hedge.backbone),
        first=_liquidations(recipe.first),
        second=_liquidations(recipe.second),
        summary=list(summary),
    )


def recipe_from_file(tree: EventTree, doc: RecipeFile) -> HedgeRecipe:
    """Rebuilds a recipe without re-deriving anything; node coverage is checked."""
    hedge = LambdaHedge(Side(doc.side), stopping_from_file(tree, doc.stopping), process_from_file(doc.backbone))
    missing = [i for i in tree.non_leaves() if i not in hedge.backbone.values]
    if missing:
        raise ModelError(f"recipe backbone has no position at {missing}")
    first = {f.node: process_from_file(f) for f in doc.first}
    second = {s.node: process_from_file(s) for s in doc.second}
    if sorted(first) != tree.non_leaves() or sorted(second) != tree.node_ids():
        raise ModelError("recipe liquidation families do not cover the tree")
    for name, family in (("first", first), ("second", second)):
        for node_id, y in sorted(family.items()):
            gaps = [i for i in tree.descendants(node_id) if not tree.is_leaf(i) and i not in y.values]
            if gaps:
                raise ModelError(f"{name} liquidation from '{node_id}' has no holding at {gaps}")
    return HedgeRecipe(hedge, first, second)


def save_recipe(path: PathLike, recipe: HedgeRecipe, summary=()) -> None:
    write_json(path, recipe_to_file(recipe, summary))


def load_recipe(path: PathLike, tree: EventTree) -> HedgeRecipe:
    return recipe_from_file(tree, read_json(path, RecipeFile))


# --- reports ---

def verify_report_to_file(report: VerifyReport, grid: int) -> VerifyReportFile:
    return VerifyReportFile(
        side=report.side.value,
        grid=grid,
        opponents=report.opponents,
        passed=report.passed,
        violations=[ViolationEntry(opponent=v.opponent, node=v.node, detail=v.detail) for v in report.violations],
        nonanticipation=list(report.nonanticipation),
    )


def arbitrage_report_to_file(report: ArbitrageReport) -> ArbitrageReportFile:
    if report.arbitrage_free:
        return ArbitrageReportFile(status=report.status.value,
                                   certificate={i: _svec(m) for i, m in sorted(report.certificate.items())})
    return ArbitrageReportFile(status=report.status.value,
                               witness=process_to_file(report.witness),
                               surplus={i: _svec(x) for i, x in sorted(report.surplus.items())})


def _stopping_map(phi: MixedStoppingTime) -> Dict[str, str]:
    return {i: fmt(v) for i, v in sorted(phi.values.items())}


def dual_report_to_file(report: DualReport) -> DualReportFile:
    gap: Optional[Fraction] = report.gap
    return DualReportFile(
        side=report.side.value,
        currency=report.j + 1,
        grid=report.grid,
        value=fmt(report.value),
        primal=None if report.primal is None else fmt(report.primal),
        gap=None if gap is None else fmt(gap),
        argument=_stopping_map(report.argument),
        entries=[DualEntryFile(outer=_stopping_map(e.outer), inner=_stopping_map(e.inner), value=fmt(e.value))
                 for e in report.entries],
    )
