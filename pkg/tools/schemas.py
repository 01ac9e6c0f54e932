# tools/schemas.py

from fractions import Fraction
from typing import Annotated, Dict, List, Optional

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, field_validator, model_validator


def _rational(value) -> str:
    """Normalizes an exact rational to "p/q"; floats are refused on the wire."""
    if isinstance(value, bool) or isinstance(value, float):
        raise ValueError(f"{value!r} is not an exact rational; write it as \"p/q\"")
    if isinstance(value, Fraction):
        f = value
    elif isinstance(value, int):
        f = Fraction(value)
    elif isinstance(value, str):
        try:
            f = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"'{value}' is not a rational number") from e
    else:
        raise ValueError(f"{value!r} is not a rational number")
    return f"{f.numerator}/{f.denominator}"


Rational = Annotated[str, BeforeValidator(_rational)]
RationalVector = List[Rational]


class _Versioned(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    schema_version: int = Field(1, alias="schema", description="File format version; always 1.")

    @field_validator("schema_version")
    @classmethod
    def _known_version(cls, v: int) -> int:
        if v != 1:
            raise ValueError(f"unsupported schema version {v}")
        return v


## 🌳 Model Schemas
class NodeSpec(BaseModel):
    """One node of the event tree with its market data and option payoffs."""
    model_config = ConfigDict(extra="forbid")

    id: str = Field(description="Unique node identifier (e.g. 'uu').")
    time: int = Field(ge=0, description="Time index of the node; the root is at 0.")
    parent: Optional[str] = Field(None, description="Parent node id; null for the root.")
    branch_prob: Rational = Field("1/1", description="Conditional probability of reaching this node from its parent.")
    pi: List[RationalVector] = Field(description="Exchange rates: pi[j][k] units of currency j buy one unit of currency k.")
    Y: RationalVector = Field(description="Portfolio delivered on exercise at this node.")
    X: RationalVector = Field(description="Portfolio delivered on cancellation at this node.")


class ModelFile(_Versioned):
    """A complete game option model: tree, exchange rates and payoffs."""
    d: int = Field(ge=2, description="Number of currencies.")
    T: int = Field(ge=1, description="Horizon (time of the leaves).")
    nodes: List[NodeSpec] = Field(description="All tree nodes, in any order.")

    @model_validator(mode="after")
    def _shapes(self) -> "ModelFile":
        for n in self.nodes:
            if len(n.pi) != self.d or any(len(row) != self.d for row in n.pi):
                raise ValueError(f"node '{n.id}': pi must be {self.d}x{self.d}")
            if len(n.Y) != self.d or len(n.X) != self.d:
                raise ValueError(f"node '{n.id}': Y and X must have {self.d} entries")
        if self.nodes and max(n.time for n in self.nodes) != self.T:
            raise ValueError(f"T={self.T} does not match the deepest node time")
        return self


## ⏱️ Process Schemas
class StoppingFile(BaseModel):
    """A mixed stopping time: the fraction stopped at each node."""
    values: Dict[str, Rational] = Field(description="Node id -> stopped fraction.")


class ProcessFile(BaseModel):
    """A predictable process: initial holding plus the holding chosen at each non-leaf node."""
    initial: RationalVector = Field(description="Holding before time 0.")
    values: Dict[str, RationalVector] = Field(description="Node id -> holding carried into its children.")


class LiquidationFile(ProcessFile):
    """A self-financing strategy that runs a deferred-solvent portfolio down to zero."""
    node: str = Field(description="Node at which the liquidation starts.")


## 🛡️ Hedge Schemas
class RecipeFile(_Versioned):
    """A full superhedge: own stopping time, backbone and both liquidation families."""
    side: str = Field(description="'seller' or 'buyer'.")
    stopping: StoppingFile = Field(description="The hedger's own mixed stopping time.")
    backbone: ProcessFile = Field(description="Backbone positions z.")
    first: List[LiquidationFile] = Field(description="Liquidations of the rebalancing residual, one per non-leaf node.")
    second: List[LiquidationFile] = Field(description="Liquidations after the opponent stops, one per node.")
    summary: List[str] = Field(default_factory=list, description="Human-readable stopping fractions.")

    @field_validator("side")
    @classmethod
    def _side(cls, v: str) -> str:
        if v not in ("seller", "buyer"):
            raise ValueError(f"side must be 'seller' or 'buyer', got '{v}'")
        return v


class ViolationEntry(BaseModel):
    opponent: int = Field(description="Index of the opponent stopping time in the grid.")
    node: str = Field(description="Node where the rebalancing left the solvency cone.")
    detail: str = Field(description="The offending portfolio.")


class VerifyReportFile(_Versioned):
    """Outcome of checking a recipe against a grid of opponent stopping times."""
    side: str = Field(description="Side of the verified recipe.")
    grid: int = Field(description="Grid resolution N (values on the 1/N lattice).")
    opponents: int = Field(description="Number of opponent stopping times checked.")
    passed: bool = Field(description="True when no violation was found.")
    violations: List[ViolationEntry] = Field(default_factory=list)
    nonanticipation: List[str] = Field(default_factory=list)


## ⚖️ Market Schemas
class ArbitrageReportFile(_Versioned):
    """Either a consistent price certificate or an arbitrage strategy with its terminal surplus."""
    status: str = Field(description="'no-arbitrage' or 'arbitrage'.")
    certificate: Optional[Dict[str, RationalVector]] = Field(None, description="Node id -> m in K*.")
    witness: Optional[ProcessFile] = Field(None, description="Self-financing strategy from zero.")
    surplus: Optional[Dict[str, RationalVector]] = Field(None, description="Leaf id -> nonnegative surplus.")


class DualEntryFile(BaseModel):
    outer: Dict[str, Rational] = Field(description="Fixed stopping time of the hedger.")
    inner: Dict[str, Rational] = Field(description="Opponent stopping time of the LP.")
    value: Rational = Field(description="Optimal LP value.")


class DualReportFile(_Versioned):
    """Grid dual prices with the primal price they bound."""
    side: str
    currency: int = Field(description="Currency index, counted from 1.")
    grid: int
    value: Rational = Field(description="Grid min-max (seller) or max-min (buyer) of the dual LPs.")
    primal: Optional[Rational] = Field(None, description="Price from the set construction.")
    gap: Optional[Rational] = Field(None, description="|primal - value|.")
    argument: Dict[str, Rational] = Field(description="Outer stopping time attaining the value.")
    entries: List[DualEntryFile] = Field(default_factory=list)
