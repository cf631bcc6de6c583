"""Rule-based geometric evaluation of spatial relations.

All rules operate on normalized coordinates (origin top-left, y downward)
and use ratio-based margins, so verdicts are invariant under uniform
scaling of all boxes about the origin. Binary by design: a relation either
holds with clearance or it does not.

Rules (A = subject, B = object; dx = cx_B - cx_A, dy = cy_B - cy_A,
margin m = theta_pos * mean(diag_A, diag_B)):

=============  =================================================================
left_of        dx > max(|dy|, m)            (dominant horizontal offset, A left)
right_of       -dx > max(|dy|, m)
above          dy > max(|dx|, m)            (y grows downward)
below          -dy > max(|dx|, m)
on             |A.y1 - B.y0| <= 0.05 * height(B), horizontal overlap >=
               0.3 * min(widths), and cy_A < cy_B
inside         IoA(A, B) >= 0.9
next_to        center distance <= mean(diag_A, diag_B), neither box inside
               the other, and not dominant vertical stacking
behind         depth_A > depth_B + eps     (larger depth = farther)
in_front_of    depth_B > depth_A + eps
=============  =================================================================
"""

from __future__ import annotations

from .constraints import CANONICAL_RELATIONS
from .errors import MissingDepth, UnsupportedRelation
from .geometry import BBox, center_distance, horizontal_overlap, ioa

THETA_POS = 0.05        # directional margin, as a fraction of mean diagonal
ON_GAP_RATIO = 0.05     # max |bottom(A) - top(B)| as a fraction of height(B)
ON_OVERLAP_RATIO = 0.3  # min horizontal overlap as a fraction of min width
INSIDE_IOA = 0.9
NEXT_TO_DISTANCE = 1.0  # max center distance in units of mean diagonal
DEPTH_EPS_RATIO = 0.02  # depth separation margin as a fraction of max depth

DEPTH_RELATION_NAMES = frozenset({"behind", "in_front_of"})


def directional_margin(subject: BBox, object_: BBox, theta_pos: float = THETA_POS) -> float:
    return theta_pos * (subject.diagonal + object_.diagonal) / 2.0


def evaluate_relation_geometric(
    name: str,
    subject: BBox,
    object_: BBox,
    depths: tuple[float, float] | None = None,
    *,
    theta_pos: float = THETA_POS,
    depth_eps: float | None = None,
) -> float:
    """Binary verdict for a canonical relation between two bound boxes.

    ``depths`` is (subject depth, object depth) and is required for behind /
    in_front_of. ``depth_eps`` overrides the separation margin; by default it
    is ``DEPTH_EPS_RATIO * max(depths)`` — callers that know the whole scene
    pass the scene-wide value.

    Raises :class:`UnsupportedRelation` for non-canonical names (those belong
    to the chain-of-thought path) and :class:`MissingDepth` when a depth
    relation arrives without depths.
    """
    if name not in CANONICAL_RELATIONS:
        raise UnsupportedRelation(f"no geometric rule for relation {name!r}")

    if name in DEPTH_RELATION_NAMES:
        if depths is None:
            raise MissingDepth(f"relation {name!r} requires subject and object depths")
        d_subj, d_obj = depths
        eps = DEPTH_EPS_RATIO * max(d_subj, d_obj) if depth_eps is None else depth_eps
        if name == "behind":
            return 1.0 if d_subj > d_obj + eps else 0.0
        return 1.0 if d_obj > d_subj + eps else 0.0

    dx = object_.cx - subject.cx
    dy = object_.cy - subject.cy
    m = directional_margin(subject, object_, theta_pos)

    if name == "left_of":
        return 1.0 if dx > max(abs(dy), m) else 0.0
    if name == "right_of":
        return 1.0 if -dx > max(abs(dy), m) else 0.0
    if name == "above":
        return 1.0 if dy > max(abs(dx), m) else 0.0
    if name == "below":
        return 1.0 if -dy > max(abs(dx), m) else 0.0

    if name == "on":
        gap_ok = abs(subject.y1 - object_.y0) <= ON_GAP_RATIO * object_.height
        overlap_ok = horizontal_overlap(subject, object_) >= ON_OVERLAP_RATIO * min(
            subject.width, object_.width
        )
        return 1.0 if gap_ok and overlap_ok and subject.cy < object_.cy else 0.0

    if name == "inside":
        return 1.0 if ioa(subject, object_) >= INSIDE_IOA else 0.0

    # next_to: close centers, no containment either way, and not a case the
    # vertical stacking rules would claim.
    mean_diag = (subject.diagonal + object_.diagonal) / 2.0
    close = center_distance(subject, object_) <= NEXT_TO_DISTANCE * mean_diag
    contained = ioa(subject, object_) >= INSIDE_IOA or ioa(object_, subject) >= INSIDE_IOA
    stacked = abs(dy) > abs(dx) and abs(dy) > m
    return 1.0 if close and not contained and not stacked else 0.0
