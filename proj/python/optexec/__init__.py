"""Optimal liquidation under transient market impact.

The heavy lifting lives in the compiled ``optexec._core`` module; this
package re-exports it.
"""

from optexec._core import (
    ActionKind,
    ConfigError,
    HScaling,
    IoError,
    ModelParams,
    NumericError,
    RecoveryKind,
    Solution,
    SolverOptions,
    frontier,
    liquidation_rate,
    solve,
)

__all__ = [
    "ActionKind",
    "ConfigError",
    "HScaling",
    "IoError",
    "ModelParams",
    "NumericError",
    "RecoveryKind",
    "Solution",
    "SolverOptions",
    "frontier",
    "liquidation_rate",
    "solve",
]
