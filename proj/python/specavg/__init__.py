"""Exactly invariant spectral regression on the flat torus and the circle."""

from ._specavg import (
    BasisMode,
    Basis,
    Group,
    KrrModel,
    Manifold,
    SpectralModel,
    averaging_projector,
    build_basis,
    build_basis_within,
    closure_size,
    cutoff_dimension,
    eval_basis,
    invariance_discrepancy,
    krr_fit,
    project,
    representation_block,
    run_experiment,
    fit,
)

__all__ = [
    "BasisMode",
    "Basis",
    "Group",
    "KrrModel",
    "Manifold",
    "SpectralModel",
    "averaging_projector",
    "build_basis",
    "build_basis_within",
    "closure_size",
    "cutoff_dimension",
    "eval_basis",
    "fit",
    "invariance_discrepancy",
    "krr_fit",
    "project",
    "representation_block",
    "run_experiment",
]
