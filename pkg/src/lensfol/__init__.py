"""Foliated diffeomorphisms of solid tori and lens spaces, checked numerically."""

from .errors import LensfolError, InvalidInput, NotDiffeo

__all__ = ["LensfolError", "InvalidInput", "NotDiffeo"]
__version__ = "0.1.0"
