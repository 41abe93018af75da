"""tubelab: a numerical laboratory for extension-operator estimates,
tube geometry, and exact exponent calculus on the restriction diagram."""

from . import exponents, extension, fields, geometry, lemmas, witnesses, xray

__all__ = [
    "exponents",
    "extension",
    "fields",
    "geometry",
    "lemmas",
    "witnesses",
    "xray",
]

__version__ = "0.1.0"
