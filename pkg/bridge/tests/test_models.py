"""Built-in models: scenegraph sidecar reading, colorbox segmentation,
scripted relation judgments, and the method binder."""

from __future__ import annotations

import json

import numpy as np
import pytest

from percbridge.config import BridgeConfigError, MethodBinding, default_bridge_config
from percbridge.models import (
    ColorBoxModel,
    MethodBinder,
    ModelError,
    SceneGraphModel,
    ScriptedCotModel,
    build_model,
    connected_boxes,
)
from percbridge.raster import write_scene_image

from conftest import CUP_BOX, DOG_BOX, GREEN_CUP_BOX


def _iou(a, b) -> float:
    ix0, iy0 = max(a[0], b[0]), max(a[1], b[1])
    ix1, iy1 = min(a[2], b[2]), min(a[3], b[3])
    inter = max(0.0, ix1 - ix0) * max(0.0, iy1 - iy0)
    area = lambda r: (r[2] - r[0]) * (r[3] - r[1])  # noqa: E731
    return inter / (area(a) + area(b) - inter) if inter else 0.0


@pytest.fixture
def sg() -> SceneGraphModel:
    return SceneGraphModel()


class TestSceneGraphDetect:
    def test_by_path(self, sg, scene_file):
        result = sg.detect({"image": {"path": str(scene_file)}, "category": "cup", "threshold": 0.3})
        assert [d["box"] for d in result["detections"]] == [CUP_BOX, GREEN_CUP_BOX]
        assert all(d["category"] == "cup" and d["confidence"] == 0.95 for d in result["detections"])

    def test_base64_matches_path(self, sg, scene_file, scene_b64):
        by_path = sg.detect({"image": {"path": str(scene_file)}, "category": "dog", "threshold": 0.3})
        by_b64 = sg.detect({"image": scene_b64, "category": "dog", "threshold": 0.3})
        assert by_path == by_b64
        assert by_path["detections"][0]["box"] == DOG_BOX

    def test_absent_category_is_empty(self, sg, scene_b64):
        assert sg.detect({"image": scene_b64, "category": "bird", "threshold": 0.3}) == {"detections": []}

    def test_threshold_prefilters(self, sg, scene_b64):
        result = sg.detect({"image": scene_b64, "category": "cup", "threshold": 0.99})
        assert result == {"detections": []}

    def test_sidecar_json_next_to_image(self, sg, tmp_path, scene):
        (tmp_path / "render.json").write_text(json.dumps(scene), encoding="utf-8")
        (tmp_path / "render.png").write_bytes(b"\x89PNG not really")
        result = sg.detect({"image": {"path": str(tmp_path / "render.png")}, "category": "dog", "threshold": 0.3})
        assert len(result["detections"]) == 1

    def test_missing_file_is_unavailable(self, sg):
        with pytest.raises(ModelError) as exc:
            sg.detect({"image": {"path": "/nonexistent/scene.json"}, "category": "cup", "threshold": 0.3})
        assert exc.value.code == "unavailable"

    def test_non_scene_json_is_unavailable(self, sg, tmp_path):
        path = tmp_path / "junk.json"
        path.write_text('{"numbers": [1, 2, 3]}', encoding="utf-8")
        with pytest.raises(ModelError) as exc:
            sg.detect({"image": {"path": str(path)}, "category": "cup", "threshold": 0.3})
        assert exc.value.code == "unavailable"

    def test_undecodable_base64_is_malformed(self, sg):
        with pytest.raises(ModelError) as exc:
            sg.detect({"image": {"base64": "!!bad!!"}, "category": "cup", "threshold": 0.3})
        assert exc.value.code == "malformed_params"


class TestSceneGraphOtherMethods:
    def test_ocr(self, sg, scene_b64):
        result = sg.ocr({"image": scene_b64})
        assert result == {"texts": [{"text": "OPEN", "box": [0.66, 0.45, 0.84, 0.55], "confidence": 0.9}]}

    def test_depth_maps_each_box(self, sg, scene_b64):
        result = sg.depth({"image": scene_b64, "boxes": [DOG_BOX, CUP_BOX]})
        assert result == {"depths": [5.0, 2.0]}

    def test_depth_defaults_when_nothing_overlaps(self, sg, scene_b64):
        result = sg.depth({"image": scene_b64, "boxes": [[0.0, 0.0, 0.02, 0.02]]})
        assert result == {"depths": [1.0]}

    def test_orientation(self, sg, scene_b64):
        assert sg.orientation({"image": scene_b64, "box": DOG_BOX}) == {"degrees": 90.0}

    def test_orientation_default(self, sg, scene_b64):
        assert sg.orientation({"image": scene_b64, "box": [0.0, 0.0, 0.02, 0.02]}) == {"degrees": 0.0}

    def test_color(self, sg, scene_b64):
        assert sg.color({"image": scene_b64, "box": CUP_BOX, "category": "cup"}) == {"color": "red"}

    def test_color_folds_spelling(self, sg, tmp_path, scene):
        scene["objects"][0]["color"] = "grey"
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(scene), encoding="utf-8")
        assert sg.color({"image": {"path": str(path)}, "box": CUP_BOX}) == {"color": "gray"}

    def test_color_default_without_overlap(self, sg, scene_b64):
        assert sg.color({"image": scene_b64, "box": [0.0, 0.0, 0.02, 0.02]}) == {"color": "gray"}

    def test_options_reject_unknown_keys(self):
        with pytest.raises(ValueError, match="unknown scenegraph options"):
            SceneGraphModel.from_options({"palette": "x"})


class TestConnectedBoxes:
    def test_single_rectangle(self):
        mask = np.zeros((20, 30), dtype=bool)
        mask[5:15, 10:25] = True
        assert connected_boxes(mask) == [(10, 5, 24, 14, 150)]

    def test_two_separate_blobs(self):
        mask = np.zeros((20, 20), dtype=bool)
        mask[2:6, 2:6] = True
        mask[10:18, 12:19] = True
        boxes = connected_boxes(mask)
        assert [(b[0], b[1], b[2], b[3]) for b in boxes] == [(2, 2, 5, 5), (12, 10, 18, 17)]

    def test_l_shape_merges_across_rows(self):
        mask = np.zeros((10, 10), dtype=bool)
        mask[0:6, 0:2] = True
        mask[4:6, 0:8] = True
        assert connected_boxes(mask) == [(0, 0, 7, 5, 24)]

    def test_diagonal_touch_is_not_connected(self):
        mask = np.array([[True, False], [False, True]])
        assert len(connected_boxes(mask, min_area=1)) == 2

    def test_min_area_filters_specks(self):
        mask = np.zeros((10, 10), dtype=bool)
        mask[0, 0] = True
        mask[5:9, 5:9] = True
        assert connected_boxes(mask, min_area=4) == [(5, 5, 8, 8, 16)]


class TestColorBox:
    def test_recovers_planted_boxes(self, tmp_path, scene):
        png = write_scene_image(scene, tmp_path / "scene.png", size=320)
        model = ColorBoxModel.from_options({"legend": {"cup": "red", "dog": "blue"}})
        for category, planted in [("cup", CUP_BOX), ("dog", DOG_BOX)]:
            result = model.detect({"image": {"path": str(png)}, "category": category, "threshold": 0.3})
            assert len(result["detections"]) == 1
            assert _iou(result["detections"][0]["box"], planted) > 0.95

    def test_two_instances_of_one_color(self, tmp_path):
        scene = {
            "objects": [
                {"category": "cup", "box": [0.1, 0.1, 0.3, 0.3], "color": "red", "depth": 1.0},
                {"category": "cup", "box": [0.6, 0.6, 0.9, 0.9], "color": "red", "depth": 2.0},
            ]
        }
        png = write_scene_image(scene, tmp_path / "two.png", size=320)
        model = ColorBoxModel.from_options({"legend": {"cup": "red"}})
        result = model.detect({"image": {"path": str(png)}, "category": "cup", "threshold": 0.3})
        assert len(result["detections"]) == 2

    def test_occlusion_lowers_fill_confidence(self, tmp_path):
        scene = {
            "objects": [
                {"category": "cup", "box": [0.2, 0.2, 0.6, 0.6], "color": "red", "depth": 5.0},
                {"category": "box", "box": [0.3, 0.3, 0.5, 0.5], "color": "black", "depth": 1.0},
            ]
        }
        png = write_scene_image(scene, tmp_path / "occ.png", size=320)
        model = ColorBoxModel.from_options({"legend": {"cup": "red"}})
        kept = model.detect({"image": {"path": str(png)}, "category": "cup", "threshold": 0.3})
        assert len(kept["detections"]) == 1
        assert 0.5 < kept["detections"][0]["confidence"] < 0.9
        dropped = model.detect({"image": {"path": str(png)}, "category": "cup", "threshold": 0.9})
        assert dropped == {"detections": []}

    def test_category_outside_legend_is_empty(self, tmp_path, scene):
        png = write_scene_image(scene, tmp_path / "scene.png", size=320)
        model = ColorBoxModel.from_options({"legend": {"cup": "red"}})
        assert model.detect({"image": {"path": str(png)}, "category": "dog", "threshold": 0.3}) == {
            "detections": []
        }

    @pytest.mark.parametrize(
        "options,fragment",
        [
            ({}, "legend"),
            ({"legend": {}}, "legend"),
            ({"legend": {"cup": "teal"}}, "color vocabulary"),
            ({"legend": {"cup": "red"}, "min_area": 0}, "min_area"),
            ({"legend": {"cup": "red"}, "blur": 2}, "unknown colorbox options"),
        ],
    )
    def test_options_rejected(self, options, fragment):
        with pytest.raises(ValueError, match=fragment):
            ColorBoxModel.from_options(options)


class TestScriptedCot:
    def _params(self, name, subject_box, object_box, facets_subject=None):
        return {
            "payload": {
                "relation": {"name": name, "subject": "e1", "object": "e2"},
                "boxes": {"subject": subject_box, "object": object_box},
                "facets": {
                    "subject": facets_subject or {"presence": 1.0},
                    "object": {"presence": 1.0},
                },
                "image": {"path": "scene.json"},
            }
        }

    def test_consistent_relation_scores_the_evidence(self):
        model = ScriptedCotModel()
        params = self._params(
            "left_of", [0.1, 0.2, 0.3, 0.8], [0.6, 0.2, 0.9, 0.8],
            facets_subject={"presence": 1.0, "color": 0.5},
        )
        result = model.cot(params)
        assert result["score"] == pytest.approx(0.5)
        assert "left_of" in result["reasoning"]

    def test_contradicted_relation_scores_zero(self):
        model = ScriptedCotModel()
        params = self._params("right_of", [0.1, 0.2, 0.3, 0.8], [0.6, 0.2, 0.9, 0.8])
        assert model.cot(params)["score"] == 0.0

    @pytest.mark.parametrize(
        "name,subject,obj,plausible",
        [
            ("above", [0.4, 0.1, 0.6, 0.3], [0.4, 0.6, 0.6, 0.9], True),
            ("below", [0.4, 0.1, 0.6, 0.3], [0.4, 0.6, 0.6, 0.9], False),
            ("on", [0.4, 0.2, 0.6, 0.4], [0.35, 0.4, 0.65, 0.8], True),
            ("on", [0.05, 0.2, 0.15, 0.4], [0.6, 0.5, 0.9, 0.8], False),
            ("inside", [0.4, 0.4, 0.5, 0.5], [0.3, 0.3, 0.7, 0.7], True),
            ("inside", [0.2, 0.4, 0.5, 0.5], [0.3, 0.3, 0.7, 0.7], False),
            ("next_to", [0.3, 0.4, 0.45, 0.6], [0.5, 0.4, 0.65, 0.6], True),
            ("next_to", [0.0, 0.0, 0.1, 0.1], [0.85, 0.85, 1.0, 1.0], False),
        ],
    )
    def test_center_judgments(self, name, subject, obj, plausible):
        model = ScriptedCotModel()
        score = model.cot(self._params(name, subject, obj))["score"]
        assert (score == 1.0) is plausible

    @pytest.mark.parametrize("name", ["behind", "in_front_of", "orbiting"])
    def test_depth_and_unknown_relations_defer_to_evidence(self, name):
        model = ScriptedCotModel()
        params = self._params(name, [0.1, 0.2, 0.3, 0.8], [0.6, 0.2, 0.9, 0.8],
                              facets_subject={"presence": 0.8})
        result = model.cot(params)
        assert result["score"] == pytest.approx(0.8)
        assert "deferring" in result["reasoning"]

    def test_out_of_range_facets_are_clipped(self):
        model = ScriptedCotModel()
        params = self._params("left_of", [0.1, 0.2, 0.3, 0.8], [0.6, 0.2, 0.9, 0.8],
                              facets_subject={"presence": 3.0})
        assert model.cot(params)["score"] == 1.0


class TestBinder:
    def test_default_config_binds_six_methods(self):
        binder = MethodBinder(default_bridge_config().bindings)
        assert binder.methods == ("color", "cot", "depth", "detect", "ocr", "orientation")

    def test_dispatch_routes(self, scene_b64):
        binder = MethodBinder(default_bridge_config().bindings)
        result = binder.dispatch("detect", {"image": scene_b64, "category": "dog", "threshold": 0.3})
        assert len(result["detections"]) == 1

    def test_unbound_method_is_not_implemented(self):
        binder = MethodBinder(default_bridge_config().bindings)
        with pytest.raises(ModelError) as exc:
            binder.dispatch("decompose", {"prompt": "a red cup"})
        assert exc.value.code == "not_implemented"

    def test_unknown_model_id(self):
        with pytest.raises(BridgeConfigError, match="unknown model 'yolo'"):
            MethodBinder({"detect": MethodBinding(model="yolo")})

    def test_model_must_implement_the_method(self):
        with pytest.raises(BridgeConfigError, match="does not implement"):
            MethodBinder({"cot": MethodBinding(model="scenegraph")})

    def test_build_model_wraps_option_errors(self):
        with pytest.raises(BridgeConfigError, match="methods.detect"):
            build_model("colorbox", {}, where="methods.detect")
