from . import ast
from .errors import MiniRuntimeError, Nontermination, ParseError, UnsupportedFeature
from .interp import IoTrace, Result, interpret, observe
from .parser import parse
from .pretty import render
from .treedist import ast_size, tree_edit_distance

__all__ = [
    "ast", "parse", "render", "interpret", "observe", "IoTrace", "Result",
    "ast_size", "tree_edit_distance", "ParseError", "UnsupportedFeature",
    "MiniRuntimeError", "Nontermination",
]
