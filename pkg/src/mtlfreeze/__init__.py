"""Out-of-order runtime verification for metric temporal logic with freeze
quantifiers: reference three-valued evaluator, incremental online monitor,
and a log generation/replay harness."""

from .formula import Formula, FormulaTable, compile_formula, formula_equal, formula_to_text
from .intervals import Interval, interval_mc, interval_minus
from .observation import Observation, initial, refines
from .oracle import Oracle, eval_at, verdict_set
from .parser import ParseError, parse_formula
from .truth import Truth3, kleene_apply, meet3

__all__ = [
    "Formula",
    "FormulaTable",
    "Interval",
    "Observation",
    "Oracle",
    "ParseError",
    "Truth3",
    "compile_formula",
    "eval_at",
    "formula_equal",
    "formula_to_text",
    "initial",
    "interval_mc",
    "interval_minus",
    "kleene_apply",
    "meet3",
    "parse_formula",
    "refines",
    "verdict_set",
]

__version__ = "0.1.0"
