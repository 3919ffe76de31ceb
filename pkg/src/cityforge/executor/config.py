"""Executor tuning knobs, overridable from a JSON config file."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional


@dataclass(frozen=True)
class ExecutorConfig:
    floor_height: float = 3.0        # meters per floor
    default_floor_count: int = 1     # used when a building omits floor_count
    bay_width: float = 2.5           # facade grid pitch
    edge_margin: float = 1.0         # facade margin at both edge ends
    min_bay_width: float = 2.5       # edges shorter than this get no components
    protrusion: float = 0.05         # components sit this far off the wall
    street_width: float = 6.0        # perimeter ring width
    street_thickness: float = 0.05
    streetlight_spacing: float = 20.0
    greenspace_thickness: float = 0.05
    tree_spacing: float = 6.0        # sampling grid inside greenspaces
    tree_inset: float = 1.0          # keep trees off greenspace boundaries
    tree_jitter: float = 0.5         # seeded positional jitter on the grid
    seed: int = 0
    components_path: Optional[str] = None  # None -> packaged components.json

    def replace(self, **kwargs) -> "ExecutorConfig":
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data.update(kwargs)
        return ExecutorConfig(**data)


def config_from_file(path: str | Path, **overrides) -> ExecutorConfig:
    """Load config JSON for the documented keys; unknown keys are rejected."""
    import json

    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    known = {f.name for f in fields(ExecutorConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    doc.update(overrides)
    return ExecutorConfig(**doc)
