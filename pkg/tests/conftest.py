from __future__ import annotations

import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

# The four-element sample block used throughout: two mixed-use towers in
# the south, two parks in the north-east, coordinates in meters.
SAMPLE_BLOCK_ELEMENTS = [
    {
        "id": "mixed_1",
        "type": "mixed-use building",
        "polygon": [[0, 0], [22, 0], [22, 22], [0, 22]],
        "floor_count": 12,
        "facade": "modern glass and steel with terracotta accents",
    },
    {
        "id": "mixed_2",
        "type": "mixed-use building",
        "polygon": [[25, 0], [47, 0], [47, 22], [25, 22]],
        "floor_count": 10,
        "facade": "concrete with greenery on the upper floors",
    },
    {
        "id": "park_1",
        "type": "greenspace",
        "polygon": [[36, 50], [55, 50], [55, 67], [36, 67]],
    },
    {
        "id": "park_2",
        "type": "greenspace",
        "polygon": [[36, 71], [55, 71], [55, 89], [36, 89]],
    },
]

SAMPLE_BUILDING = {
    "window": "expansive, glass, modern, blue-tinted",
    "door": "sleek, modern, glass, automatic",
    "roof": "flat, sleek, modern, weather-resistant",
}

BOWTIE_BLOCK = [
    {
        "id": "bow_1",
        "type": "residential",
        "polygon": [[0, 0], [10, 10], [10, 0], [0, 10]],
        "floor_count": 3,
    }
]


@pytest.fixture
def sample_block_text() -> str:
    return json.dumps(SAMPLE_BLOCK_ELEMENTS, indent=2)


@pytest.fixture
def sample_building_text() -> str:
    return json.dumps(SAMPLE_BUILDING, indent=2)


@pytest.fixture
def bowtie_block_text() -> str:
    return json.dumps(BOWTIE_BLOCK)


@pytest.fixture
def sample_block_program(sample_block_text):
    from cityforge import parse_block_program

    return parse_block_program(sample_block_text)


@pytest.fixture
def sample_building_program(sample_building_text):
    from cityforge import parse_building_program

    return parse_building_program(sample_building_text)
