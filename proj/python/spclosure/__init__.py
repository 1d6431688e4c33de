"""Structure-preserving neural closure models for coarse-grained 1D PDEs."""

from ._core import (
    Closure,
    Grid,
    dissipation_lambda2,
    energy_spectrum,
    inner_product,
    integrated_nrmse,
    kde_evaluate,
    load_checkpoint,
    no_closure,
    nrmse,
    regrid,
    simulate_fine,
    verify,
)

__all__ = [
    "Closure",
    "Grid",
    "dissipation_lambda2",
    "energy_spectrum",
    "inner_product",
    "integrated_nrmse",
    "kde_evaluate",
    "load_checkpoint",
    "no_closure",
    "nrmse",
    "regrid",
    "simulate_fine",
    "verify",
]
