"""Models package."""

from .schemas import (
    SCHEMA_VERSION,
    BoundCheck,
    BoundPoint,
    CousinCountReport,
    CousinPair,
    CrtOffset,
    DeletionOutcome,
    DeletionResidue,
    DescentChain,
    ExpansionTerm,
    LemmaGrid,
    LemmaId,
    LemmaWitness,
    OutputFormat,
    RecurrenceCheck,
    SweepReport,
)

__all__ = [
    "SCHEMA_VERSION",
    "BoundCheck",
    "BoundPoint",
    "CousinCountReport",
    "CousinPair",
    "CrtOffset",
    "DeletionOutcome",
    "DeletionResidue",
    "DescentChain",
    "ExpansionTerm",
    "LemmaGrid",
    "LemmaId",
    "LemmaWitness",
    "OutputFormat",
    "RecurrenceCheck",
    "SweepReport",
]
