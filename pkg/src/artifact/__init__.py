"""Frechet distance queries between a preprocessed polygonal curve and a segment."""

from artifact.geom import Point, Direction, QueryLine, AlgebraicPiece
from artifact.envelope import PiecewiseAlgebraicFunction, upper_envelope, evaluate
from artifact.structure import (
    Curve,
    CurvePosition,
    QuerySegment,
    FrechetResult,
    FrechetStructure,
    build,
    query,
    query_subcurve,
)

__all__ = [
    "Point",
    "Direction",
    "QueryLine",
    "AlgebraicPiece",
    "PiecewiseAlgebraicFunction",
    "upper_envelope",
    "evaluate",
    "Curve",
    "CurvePosition",
    "QuerySegment",
    "FrechetResult",
    "FrechetStructure",
    "build",
    "query",
    "query_subcurve",
]
