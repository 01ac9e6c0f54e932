# engine/errors.py

from typing import Optional


class GameOptionError(Exception):
    """Base class for every failure the engine reports to its callers."""

    exit_code = 1


class ModelError(GameOptionError):
    """Malformed model: tree shape, probabilities, rates, payoffs or file contents."""

    exit_code = 1


class PreconditionError(GameOptionError):
    """An operation was called outside its domain (e.g. liquidation from outside Q_t)."""

    exit_code = 1


class GridTooLargeError(GameOptionError):
    """A stopping-time grid would exceed the configured number of points."""

    exit_code = 1


class ArbitrageError(GameOptionError):
    """The model admits arbitrage, so a superhedging set came out empty or unbounded."""

    exit_code = 2


class InfeasibleInitialError(GameOptionError):
    """The requested initial endowment lies outside Z_0 of the chosen side."""

    exit_code = 3

    def __init__(self, message: str, halfspace: Optional[str] = None):
        super().__init__(message)
        self.halfspace = halfspace
