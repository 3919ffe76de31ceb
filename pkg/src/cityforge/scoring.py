"""Spatial alignment reward: structural components, raster, preference pairs.

The two structural scores are pure geometry: the overlap score punishes
pairwise bounding-box intersection relative to block area, and the density
score targets a built-coverage band (default 0.5-0.8). The two semantic
scores come from a pluggable judge; the built-in stub is deterministic so
the reward pipeline is testable without any external model. The overall
reward is the mean of the four components on a 0-10 scale.
"""

from __future__ import annotations

import base64
import io
import json
import re
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

from PIL import Image, ImageDraw

from . import geometry
from .programs import BlockProgram, GREENSPACE_TYPE

BUILDING_RGB = (0x1F, 0x4F, 0xD8)
GREENSPACE_RGB = (0x2E, 0x9E, 0x44)
BACKGROUND_RGB = (0xFF, 0xFF, 0xFF)

DEFAULT_PAIR_THRESHOLD = 5.0


class EmptyRegion(ValueError):
    """Block region has no area to normalize by."""


class ExternalScorerUnavailable(RuntimeError):
    """The configured external semantic scorer could not be reached."""


@dataclass(frozen=True)
class DensityBand:
    """Target built-coverage fraction band."""

    d_min: float = 0.5
    d_max: float = 0.8

    def __post_init__(self) -> None:
        if not (0.0 < self.d_min < self.d_max < 1.0):
            raise ValueError(f"band must satisfy 0 < d_min < d_max < 1, got {self}")


DEFAULT_BAND = DensityBand()


@dataclass(frozen=True)
class SpatialScore:
    s_align: float
    s_plau: float
    s_overlap: float
    s_density: float
    s_spatial: float
    semantic_source: str = "stub"

    def components(self) -> tuple[float, float, float, float]:
        return (self.s_align, self.s_plau, self.s_overlap, self.s_density)

    def to_jsonable(self) -> dict:
        return {
            "s_align": self.s_align,
            "s_plau": self.s_plau,
            "s_overlap": self.s_overlap,
            "s_density": self.s_density,
            "s_spatial": self.s_spatial,
            "semantic_source": self.semantic_source,
        }


@dataclass(frozen=True)
class SemanticJudgment:
    s_align: float
    s_plau: float
    source: str


class SemanticScorer(Protocol):
    """Judge contract: score alignment and plausibility on a 0-10 scale."""

    def score(self, prompt: str, raster_png: bytes,
              program: BlockProgram) -> SemanticJudgment: ...


@dataclass(frozen=True)
class PreferencePair:
    chosen: BlockProgram
    rejected: BlockProgram
    chosen_score: SpatialScore
    rejected_score: SpatialScore

    @property
    def margin(self) -> float:
        return self.chosen_score.s_spatial - self.rejected_score.s_spatial


# ---------------------------------------------------------------------------
# structural components


def _region_area(program: BlockProgram) -> float:
    area = program.region.area
    if area <= 0:
        raise EmptyRegion("block region has zero area")
    return area


def overlap_fraction(program: BlockProgram) -> float:
    """Total pairwise AABB intersection area over block area."""
    area_l = _region_area(program)
    boxes = [e.polygon.aabb() for e in program.elements]
    total = 0.0
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            total += geometry.aabb_intersection_area(boxes[i], boxes[j])
    return total / area_l


def score_overlap(program: BlockProgram) -> float:
    """10 x (1 - O), clamped to [0, 10] for pathological stacking."""
    return max(0.0, min(10.0, 10.0 * (1.0 - overlap_fraction(program))))


def building_coverage(program: BlockProgram) -> float:
    """Built coverage D: sum of building AABB areas over block area."""
    area_l = _region_area(program)
    built = sum(e.polygon.aabb().area for e in program.building_elements())
    return built / area_l


def score_density(program: BlockProgram, band: DensityBand = DEFAULT_BAND) -> float:
    """10 inside the band, dropping linearly toward 0 on either side."""
    d = building_coverage(program)
    if band.d_min <= d <= band.d_max:
        return 10.0
    if d < band.d_min:
        return 10.0 * d / band.d_min
    return 10.0 * max(0.0, (1.0 - d) / (1.0 - band.d_max))


# ---------------------------------------------------------------------------
# top-down raster


def render_topdown(program: BlockProgram, resolution: int = 512) -> Image.Image:
    """Deterministic top-down raster: buildings blue, greenspaces green.

    The longer region side maps to ``resolution`` pixels; elements draw in
    program order, so later elements paint over earlier ones.
    """
    region = program.region
    scale = resolution / max(region.width, region.height)
    w_px = max(1, round(region.width * scale))
    h_px = max(1, round(region.height * scale))
    img = Image.new("RGB", (w_px, h_px), BACKGROUND_RGB)
    draw = ImageDraw.Draw(img)
    for e in program.elements:
        color = GREENSPACE_RGB if e.is_greenspace else BUILDING_RGB
        pts = [((x - region.x_min) * scale - 0.5,
                (region.y_max - y) * scale - 0.5)
               for x, y in e.polygon.coords]
        draw.polygon(pts, fill=color)
    return img


def png_bytes(image: Image.Image) -> bytes:
    buf = io.BytesIO()
    image.save(buf, format="PNG")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# semantic scorers


_NUMBER_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6,
    "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11, "twelve": 12,
}

# Phrases recognized in prompts, mapped to canonical element types.
_TYPE_PHRASES = [
    ("mixed-use buildings", "mixed-use building"),
    ("mixed-use building", "mixed-use building"),
    ("mixed use buildings", "mixed-use building"),
    ("mixed use building", "mixed-use building"),
    ("resident buildings", "residential"),
    ("resident building", "residential"),
    ("residential buildings", "residential"),
    ("residential building", "residential"),
    ("residential", "residential"),
    ("apartments", "residential"),
    ("apartment", "residential"),
    ("commercial buildings", "commercial"),
    ("commercial building", "commercial"),
    ("commercial", "commercial"),
    ("offices", "office"),
    ("office", "office"),
    ("schools", "school"),
    ("school", "school"),
    ("libraries", "library"),
    ("library", "library"),
    ("greenspaces", GREENSPACE_TYPE),
    ("greenspace", GREENSPACE_TYPE),
    ("green spaces", GREENSPACE_TYPE),
    ("green space", GREENSPACE_TYPE),
    ("parks", GREENSPACE_TYPE),
    ("park", GREENSPACE_TYPE),
]


def declared_type_multiset(prompt: str) -> Counter:
    """Extract the element-type multiset a prompt asks for.

    Each recognized phrase counts once, or by a directly preceding count
    ("3 offices", "two parks"). Matched spans are masked so that longer
    phrases win over their substrings.
    """
    text = prompt.lower()
    counts: Counter = Counter()
    for phrase, canonical in _TYPE_PHRASES:
        pattern = re.compile(
            r"(?:(\d+|" + "|".join(_NUMBER_WORDS) + r")\s+)?" + re.escape(phrase)
            + r"\b")
        while True:
            m = pattern.search(text)
            if not m:
                break
            qty = m.group(1)
            n = int(qty) if qty and qty.isdigit() else _NUMBER_WORDS.get(qty or "", 1)
            counts[canonical] += n
            text = text[:m.start()] + "#" * (m.end() - m.start()) + text[m.end():]
    return counts


def program_type_multiset(program: BlockProgram) -> Counter:
    counts: Counter = Counter()
    for e in program.elements:
        if e.is_greenspace:
            counts[GREENSPACE_TYPE] += 1
        elif e.element_type in ("residential", "commercial", "office", "school",
                                "library", "mixed-use building"):
            counts[e.element_type] += 1
        else:
            counts["building"] += 1
    return counts


def multiset_distance(a: Counter, b: Counter) -> float:
    """Normalized multiset edit distance in [0, 1]."""
    total = sum(a.values()) + sum(b.values())
    if total == 0:
        return 0.0
    sym_diff = sum((a - b).values()) + sum((b - a).values())
    return sym_diff / total


class StubSemanticScorer:
    """Deterministic stand-in for the visual judge.

    Alignment compares the prompt's declared type multiset against the
    program's; plausibility is the overlap score recomputed on the true
    footprint polygons instead of bounding boxes.
    """

    source = "stub"

    def score(self, prompt: str, raster_png: bytes,
              program: BlockProgram) -> SemanticJudgment:
        declared = declared_type_multiset(prompt)
        if not declared:
            s_align = 10.0
        else:
            s_align = 10.0 * (1.0 - multiset_distance(
                declared, program_type_multiset(program)))
        area_l = _region_area(program)
        polys = [e.polygon.coords for e in program.elements]
        overlap = 0.0
        for i in range(len(polys)):
            for j in range(i + 1, len(polys)):
                overlap += geometry.polygon_intersection_area(polys[i], polys[j])
        s_plau = max(0.0, min(10.0, 10.0 * (1.0 - overlap / area_l)))
        return SemanticJudgment(s_align=round(s_align, 6), s_plau=round(s_plau, 6),
                                source=self.source)


class ExternalSemanticScorer:
    """HTTP judge client posting the prompt and a base64 PNG raster.

    Request: ``{"prompt": ..., "image_png_b64": ...}``; response:
    ``{"semantic_alignment": x, "global_plausibility": y}``. Falls back to
    the stub only when explicitly allowed.
    """

    source = "external"

    def __init__(self, url: str, timeout: float = 10.0, retries: int = 2,
                 allow_stub_fallback: bool = False):
        self.url = url
        self.timeout = timeout
        self.retries = retries
        self.allow_stub_fallback = allow_stub_fallback

    def score(self, prompt: str, raster_png: bytes,
              program: BlockProgram) -> SemanticJudgment:
        import requests

        payload = {"prompt": prompt,
                   "image_png_b64": base64.b64encode(raster_png).decode("ascii")}
        last_error: Optional[Exception] = None
        for _ in range(self.retries + 1):
            try:
                resp = requests.post(self.url, json=payload, timeout=self.timeout)
                resp.raise_for_status()
                doc = resp.json()
                return SemanticJudgment(
                    s_align=float(doc["semantic_alignment"]),
                    s_plau=float(doc["global_plausibility"]),
                    source=self.source)
            except Exception as exc:  # noqa: BLE001 - network/shape errors alike
                last_error = exc
        if self.allow_stub_fallback:
            return StubSemanticScorer().score(prompt, raster_png, program)
        raise ExternalScorerUnavailable(
            f"semantic scorer at {self.url} unavailable: {last_error}")


# ---------------------------------------------------------------------------
# combined reward


def _clamp10(x: float) -> float:
    return max(0.0, min(10.0, x))


def score_spatial(program: BlockProgram, prompt: str = "",
                  scorer: Optional[SemanticScorer] = None,
                  band: DensityBand = DEFAULT_BAND,
                  resolution: int = 512,
                  weights: Optional[Sequence[float]] = None) -> SpatialScore:
    """Compute all four reward components and their mean.

    ``weights`` (align, plau, overlap, density) switches to a weighted
    mean; default is the uniform mean.
    """
    scorer = scorer or StubSemanticScorer()
    raster = png_bytes(render_topdown(program, resolution))
    judgment = scorer.score(prompt, raster, program)
    s_align = _clamp10(judgment.s_align)
    s_plau = _clamp10(judgment.s_plau)
    s_overlap = score_overlap(program)
    s_density = score_density(program, band)
    comps = (s_align, s_plau, s_overlap, s_density)
    if weights is None:
        s_spatial = sum(comps) / 4.0
    else:
        if len(weights) != 4 or min(weights) < 0 or sum(weights) <= 0:
            raise ValueError("weights must be 4 non-negative values")
        s_spatial = sum(w * c for w, c in zip(weights, comps)) / sum(weights)
    return SpatialScore(s_align=s_align, s_plau=s_plau, s_overlap=s_overlap,
                        s_density=s_density, s_spatial=s_spatial,
                        semantic_source=judgment.source)


def build_preference_pairs(
        candidates: Sequence[tuple[BlockProgram, SpatialScore]],
        threshold: float = DEFAULT_PAIR_THRESHOLD) -> list[PreferencePair]:
    """All unordered pairs whose reward difference reaches the threshold.

    The higher-scoring program becomes ``chosen``. Pairs keep candidate
    order: (i, j) with i < j, emitted in index order.
    """
    if len(candidates) < 2:
        return []
    pairs: list[PreferencePair] = []
    for i in range(len(candidates)):
        for j in range(i + 1, len(candidates)):
            (prog_i, score_i), (prog_j, score_j) = candidates[i], candidates[j]
            diff = score_i.s_spatial - score_j.s_spatial
            if abs(diff) < threshold:
                continue
            if diff >= 0:
                pairs.append(PreferencePair(prog_i, prog_j, score_i, score_j))
            else:
                pairs.append(PreferencePair(prog_j, prog_i, score_j, score_i))
    return pairs
