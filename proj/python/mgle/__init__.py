"""Memory kernels, fluctuating forces and their verification for projected linear dynamics."""

from ._mgle import (
    AccuracyError,
    ConfigError,
    ConstructionError,
    DimensionError,
    Error,
    adjoint,
    check_dyson,
    convolve,
    expm,
    gle,
    oscillator,
    run,
    solve_convolution,
    version,
)

__all__ = [
    "AccuracyError",
    "ConfigError",
    "ConstructionError",
    "DimensionError",
    "Error",
    "adjoint",
    "check_dyson",
    "convolve",
    "expm",
    "gle",
    "oscillator",
    "run",
    "solve_convolution",
    "version",
]
