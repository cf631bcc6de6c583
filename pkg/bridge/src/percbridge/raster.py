"""Rasterize scene-graph JSON into solid-rectangle images.

Scenes are the engine's fixture format: ``{"objects": [{"category", "box",
"color", "depth", ...}], "texts": [...]}`` with boxes normalized to the unit
square, y growing downward.  Each object is painted as a filled rectangle in
its palette color, farthest-first so nearer objects occlude.  Text regions
are not painted — the raster path exists to give pixel detectors something
to find, not to exercise OCR.

The palette is the fixed RGB value per color-vocabulary name that the
``colorbox`` detector matches exactly; the background is chosen off-palette
so "white" and "gray" objects stay segmentable.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Mapping

from PIL import Image, ImageDraw

PALETTE: dict[str, tuple[int, int, int]] = {
    "red": (200, 30, 30),
    "orange": (240, 130, 20),
    "yellow": (240, 210, 40),
    "green": (40, 160, 60),
    "blue": (40, 90, 200),
    "purple": (130, 60, 180),
    "pink": (240, 130, 180),
    "brown": (130, 80, 40),
    "black": (20, 20, 20),
    "white": (255, 255, 255),
    "gray": (128, 128, 128),
}

BACKGROUND = (238, 238, 238)

_SPELLING_FOLDS = {"grey": "gray", "violet": "purple"}


def palette_color(name: str) -> tuple[int, int, int]:
    name = _SPELLING_FOLDS.get(name, name)
    try:
        return PALETTE[name]
    except KeyError:
        raise ValueError(f"{name!r} is not in the color vocabulary") from None


def box_to_pixels(box: list[float], size: int) -> tuple[int, int, int, int]:
    """Normalized box → inclusive pixel rectangle.  The inverse mapping
    (``pixels_to_box``) reconstructs the normalized box to within half a
    pixel per edge, which is what bounds the raster round-trip error."""
    x0, y0, x1, y1 = box
    px0 = round(x0 * size)
    py0 = round(y0 * size)
    px1 = max(px0, round(x1 * size) - 1)
    py1 = max(py0, round(y1 * size) - 1)
    return px0, py0, min(px1, size - 1), min(py1, size - 1)


def pixels_to_box(px0: int, py0: int, px1: int, py1: int, size: int) -> list[float]:
    return [px0 / size, py0 / size, (px1 + 1) / size, (py1 + 1) / size]


def rasterize_scene(scene: Mapping[str, Any], *, size: int = 320) -> Image.Image:
    if size < 16:
        raise ValueError(f"raster size must be >= 16, got {size}")
    img = Image.new("RGB", (size, size), BACKGROUND)
    draw = ImageDraw.Draw(img)
    objects = scene.get("objects", [])
    for obj in sorted(objects, key=lambda o: -float(o.get("depth", 1.0))):
        px0, py0, px1, py1 = box_to_pixels(obj["box"], size)
        draw.rectangle((px0, py0, px1, py1), fill=palette_color(obj.get("color", "gray")))
    return img


def write_scene_image(scene: Mapping[str, Any], out_path: str | Path, *, size: int = 320) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    rasterize_scene(scene, size=size).save(out_path, format="PNG")
    return out_path
