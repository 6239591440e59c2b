"""Textual model language: parser, type checker and pretty-printer."""

from .diagnostics import Diagnostic, SpecError
from .parser import SourceSpec, parse
from .printer import pretty_print
from .typecheck import CheckedModel, typecheck

__all__ = [
    "Diagnostic",
    "SpecError",
    "SourceSpec",
    "parse",
    "pretty_print",
    "CheckedModel",
    "typecheck",
]
