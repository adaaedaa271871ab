"""Factored value iteration and supporting tools for (factored) MDPs."""

__version__ = "0.1.0"

from fvi.errors import InvalidInputError, ModelError

__all__ = ["InvalidInputError", "ModelError", "__version__"]
