"""Contextual control flow analysis for Brane Calculi (MBD and PEP actions)."""

from .syntax import (
    ROOT,
    Action,
    CanonicalSystem,
    ParseError,
    actions_of,
    canonicalize,
    parse,
    pretty,
)

__all__ = [
    "ROOT",
    "Action",
    "CanonicalSystem",
    "ParseError",
    "actions_of",
    "canonicalize",
    "parse",
    "pretty",
]
