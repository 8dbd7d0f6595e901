"""Squeezed coherent states of a position-dependent-mass oscillator."""

__version__ = "0.1.0"

from ._backend import BACKEND  # noqa: E402
from .pdm_model import DerivedConstants, ModelParams, derive_constants  # noqa: E402
from .squeezed_state import CoefficientVector, Method, StateSpec, build_state  # noqa: E402

__all__ = ["BACKEND", "CoefficientVector", "DerivedConstants", "Method", "ModelParams",
           "StateSpec", "build_state", "derive_constants", "__version__"]
