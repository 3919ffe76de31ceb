"""cityforge: block/building layout programs, scoring, and a 3D city executor."""

from .programs import (
    BlockElement,
    BlockProgram,
    BlockRegion,
    BuildingComponent,
    BuildingProgram,
    FootprintPolygon,
    FormatVerdict,
    Vertex2D,
    check_format,
    parse_block_program,
    parse_building_program,
    serialize,
)

__version__ = "0.1.0"

__all__ = [
    "BlockElement",
    "BlockProgram",
    "BlockRegion",
    "BuildingComponent",
    "BuildingProgram",
    "FootprintPolygon",
    "FormatVerdict",
    "Vertex2D",
    "check_format",
    "parse_block_program",
    "parse_building_program",
    "serialize",
    "__version__",
]
