"""Closed-form per-facet rewards over perception results.

Every function here is a pure scalar function: no randomness, no I/O, no
hidden state. Composition of facets into a per-constraint score lives in
:mod:`spatialscore.reasoner`; this module only produces the raw facet values.
"""

from __future__ import annotations

import math
import re
import unicodedata
from dataclasses import dataclass
from typing import Sequence, Sized

from .constraints import normalize_color
from .geometry import BBox, ioa

# Orientation tolerance: a match within half a 45-degree bin either side in
# categorical-8way mode, half of that when targets are continuous degrees.
DELTA_CAT8 = 45.0
DELTA_CONT = 22.5


@dataclass(frozen=True, slots=True)
class SubRewardVector:
    """Per-constraint facet scores. ``None`` marks a facet the constraint
    does not ask for; present values lie in [0, 1].

    ``presence = 0.0`` does not zero the other fields here — they stay
    reported for diagnostics — but it gates the composed constraint score
    to 0 downstream.
    """

    presence: float
    count: float | None = None
    color: float | None = None
    orientation: float | None = None
    depth: float | None = None
    text: float | None = None
    bound_boxes: tuple[BBox, ...] = ()

    def __post_init__(self):
        for name in ("presence", "count", "color", "orientation", "depth", "text"):
            v = getattr(self, name)
            if v is None:
                continue
            if not (0.0 <= v <= 1.0) or math.isnan(v):
                raise ValueError(f"{name} reward out of range: {v!r}")

    def facets(self) -> dict[str, float]:
        """The present facet values, keyed by name, in a fixed order."""
        out: dict[str, float] = {"presence": self.presence}
        for name in ("count", "color", "orientation", "depth", "text"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        return out


def presence_reward(detections: Sized) -> float:
    """1.0 iff at least one (already threshold-filtered) detection exists."""
    return 1.0 if len(detections) > 0 else 0.0


def count_reward(n_detected: int, n_target: int) -> float:
    """exp(-|n_detected - n_target|); 1.0 iff the count is exact."""
    if n_detected < 0:
        raise ValueError(f"negative detection count: {n_detected}")
    if n_target < 1:
        raise ValueError(f"count target must be >= 1, got {n_target}")
    return math.exp(-abs(n_detected - n_target))


def color_reward(detected: str | None, target: str) -> float:
    """Binary match over the closed color vocabulary (synonyms folded)."""
    if detected is None:
        return 0.0
    return 1.0 if normalize_color(detected) == normalize_color(target) else 0.0


def circular_distance(a: float, b: float) -> float:
    """Angular distance on the circle, in [0, 180]."""
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


def orientation_reward(theta_detected: float, theta_target: float, delta: float) -> float:
    """1.0 iff the circular distance between the angles is within delta."""
    if delta < 0:
        raise ValueError(f"negative tolerance: {delta}")
    return 1.0 if circular_distance(theta_detected, theta_target) <= delta else 0.0


def depth_reward(rank_detected: int, rank_target: int) -> float:
    """exp(-|rank difference|). Ranks are 1-based, 1 = nearest the camera."""
    if rank_detected < 1 or rank_target < 1:
        raise ValueError(f"ranks are 1-based: ({rank_detected}, {rank_target})")
    return math.exp(-abs(rank_detected - rank_target))


def assign_depth_ranks(depths: Sequence[tuple[float, float]]) -> list[int]:
    """Rank (depth, x0) pairs ascending by depth, nearest first.

    Ties on depth break by x0 ascending. Returns 1-based ranks aligned
    with the input order.
    """
    order = sorted(range(len(depths)), key=lambda i: (depths[i][0], depths[i][1]))
    ranks = [0] * len(depths)
    for rank, i in enumerate(order, start=1):
        ranks[i] = rank
    return ranks


# --- rendered-text rewards ---------------------------------------------------

_PUNCT_EDGE = re.compile(r"^[\W_]+|[\W_]+$", re.UNICODE)


def normalize_text(s: str) -> str:
    """NFC, casefold, collapse whitespace, strip edge punctuation."""
    s = unicodedata.normalize("NFC", s).casefold()
    s = re.sub(r"\s+", " ", s).strip()
    return _PUNCT_EDGE.sub("", s)


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance (unit insert/delete/substitute), two-row DP."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(
                prev[j] + 1,          # delete from a
                cur[j - 1] + 1,       # insert into a
                prev[j - 1] + (ca != cb),
            ))
        prev = cur
    return prev[-1]


def lexical_similarity(target: str, detected: str) -> float:
    """1 - normalized edit distance over normalized strings.

    Both strings empty after normalization compare equal (1.0).
    """
    a = normalize_text(target)
    b = normalize_text(detected)
    if not a and not b:
        return 1.0
    return 1.0 - edit_distance(a, b) / max(len(a), len(b))


def text_reward(target: str, obj_box: BBox, detections: Sequence[tuple[str, BBox]]) -> float:
    """Best joint (lexical similarity x containment) over OCR candidates.

    Each candidate is a (text, box) pair; containment is the fraction of the
    text box inside the object box. Empty candidate list scores 0.0.
    """
    if not detections:
        return 0.0
    return max(
        lexical_similarity(target, text) * ioa(box, obj_box)
        for text, box in detections
    )
