"""Non-intersecting Brownian bridge line ensembles: samplers, lattice walks, verification."""

from .core import (
    Barrier,
    Curve,
    DomainError,
    Interval,
    LatticeParams,
    LineEnsemble,
    RngSeed,
    StructuralError,
    WeylVector,
    check_avoiding,
    eval_curve,
    read_ensembles,
    write_ensembles,
)

__all__ = [
    "Barrier",
    "Curve",
    "DomainError",
    "Interval",
    "LatticeParams",
    "LineEnsemble",
    "RngSeed",
    "StructuralError",
    "WeylVector",
    "check_avoiding",
    "eval_curve",
    "read_ensembles",
    "write_ensembles",
]
