"""Tupper-style self-referential plotting generalised to n dimensions and m colours.

``encode`` packs a colour field into a natural number k; ``decode`` and the
literal formula evaluator ``eval_f`` read any k back.
"""

__version__ = "0.1.0"

from .codec import (ColorField, EncodedNumber, GridParams, MultiColorCell, ParamError,
                    ValidationReport, bit_index, decode, decode_cell, decode_field,
                    decode_membership, encode, make_params, split_bit_index, validate_encoded)
from .dyadic import Dyadic, floor_dyadic, mod_real
from .evaluate import (InvariantViolation, bit_extract, classic_encode, eval_classic, eval_f,
                       is_painted)

__all__ = [
    "ColorField", "Dyadic", "EncodedNumber", "GridParams", "InvariantViolation", "MultiColorCell",
    "ParamError", "ValidationReport", "bit_extract", "bit_index", "classic_encode", "decode",
    "decode_cell", "decode_field", "decode_membership", "encode", "eval_classic", "eval_f",
    "floor_dyadic", "is_painted", "make_params", "mod_real", "split_bit_index", "validate_encoded",
]
