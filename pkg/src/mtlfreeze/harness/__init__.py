from .compare import CompareReport, Violation, compare_messages, compare_transformations
from .fuzz import FuzzCase, make_case, random_formula, random_transformation_sequence
from .prng import SplitMix64

__all__ = [
    "CompareReport",
    "FuzzCase",
    "SplitMix64",
    "Violation",
    "compare_messages",
    "compare_transformations",
    "make_case",
    "random_formula",
    "random_transformation_sequence",
]
