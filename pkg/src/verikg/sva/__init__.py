"""Assertion-subset front end: parse, emit, and bind property files."""

from verikg.sva.ast import (
    BindErrors,
    BoundProperty,
    ClockSpec,
    PropertyDecl,
    PropertyFile,
    Sequence,
    SeqStep,
)
from verikg.sva.parser import parse_properties
from verikg.sva.emit import emit_properties
from verikg.sva.bind import bind

__all__ = [
    "BindErrors",
    "BoundProperty",
    "ClockSpec",
    "PropertyDecl",
    "PropertyFile",
    "Sequence",
    "SeqStep",
    "parse_properties",
    "emit_properties",
    "bind",
]
