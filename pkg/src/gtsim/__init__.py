"""gtsim: spectral simulation and verification toolkit for the Gabitov-Turitsyn equation."""

from gtsim.core import (
    AccuracyWarning,
    ConfigurationError,
    DomainError,
    Field,
    Grid,
    SobolevIndex,
    free_propagate,
    from_freq,
    make_grid,
    sobolev_norm,
    to_freq,
)

__version__ = "0.1.0"
