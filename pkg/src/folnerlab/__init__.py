"""Amenability workbench: Folner sets, Reiter functions and matchings on numbered groups."""

from .words import code_of, decode_word, encode_word, format_word, inv, parse_word, star
from .zoo import DescriptorError, EqualityEnumerator, equal, eval_code, from_json

__all__ = [
    "DescriptorError", "EqualityEnumerator", "code_of", "decode_word", "encode_word", "equal",
    "eval_code", "format_word", "from_json", "inv", "parse_word", "star",
]

__version__ = "0.1.0"
