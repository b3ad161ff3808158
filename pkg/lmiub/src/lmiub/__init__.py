"""LMI/SDP upper bound on the induced L2 gain of gridded LPV systems."""

from .model import Model, load_model, model_from_dict
from .sdp import (
    Basis,
    UpperBoundResult,
    basis_from_dict,
    default_grid,
    load_basis,
    rate_vertices,
    upper_bound,
)

__version__ = "0.1.0"

__all__ = [
    "Model", "load_model", "model_from_dict", "Basis", "UpperBoundResult",
    "basis_from_dict", "default_grid", "load_basis", "rate_vertices",
    "upper_bound",
]
