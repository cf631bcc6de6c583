import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spatialscore.serialize import (
    FLOAT_DIGITS,
    canonical_json,
    canonical_json_bytes,
    fmt_float,
    round_real,
)


class TestFloatFormatting:
    def test_nine_digits(self):
        assert fmt_float(0.3) == "0.300000000"
        assert fmt_float(1 / 3) == "0.333333333"

    def test_negative_zero_normalized(self):
        assert fmt_float(-0.0) == "0.000000000"
        assert fmt_float(-1e-15) == "0.000000000"

    def test_integral_floats(self):
        assert fmt_float(2.0) == "2.000000000"

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), float("-inf")])
    def test_rejects_non_finite(self, bad):
        with pytest.raises(ValueError):
            fmt_float(bad)

    def test_round_real_quantizes(self):
        x = 0.1234567894999
        assert round_real(x) == float(f"{x:.{FLOAT_DIGITS}f}")

    @given(st.floats(-1e6, 1e6, allow_nan=False))
    def test_round_real_idempotent(self, x):
        q = round_real(x)
        assert round_real(q) == q

    @given(st.floats(-1e6, 1e6, allow_nan=False))
    def test_quantized_floats_roundtrip_via_wire(self, x):
        q = round_real(x)
        assert json.loads(canonical_json(q)) == q


class TestCanonicalJson:
    def test_key_order_is_insertion_order(self):
        assert canonical_json({"b": 1, "a": 2}) == '{"b":1,"a":2}'

    def test_nested(self):
        doc = {"x": [1, 2.5, "s"], "y": {"k": True, "j": None}}
        assert canonical_json(doc) == '{"x":[1,2.500000000,"s"],"y":{"k":true,"j":null}}'

    def test_bool_not_confused_with_int(self):
        assert canonical_json([True, False, 1, 0]) == "[true,false,1,0]"

    def test_tuple_as_array(self):
        assert canonical_json((1, 2)) == "[1,2]"

    def test_unicode_not_escaped(self):
        assert canonical_json("café") == '"café"'

    def test_string_escapes(self):
        assert canonical_json('a"b\n') == json.dumps('a"b\n')

    def test_rejects_non_string_keys(self):
        with pytest.raises(TypeError):
            canonical_json({1: "x"})

    def test_rejects_nan_inside(self):
        with pytest.raises(ValueError):
            canonical_json({"x": math.nan})

    def test_rejects_unsupported_types(self):
        with pytest.raises(TypeError):
            canonical_json({"x": {1, 2}})

    def test_bytes_variant(self):
        assert canonical_json_bytes({"a": 1}) == b'{"a":1}'

    def test_deterministic(self):
        doc = {"z": [0.1, {"q": -0.0}], "a": "x"}
        assert canonical_json(doc) == canonical_json(doc)

    @given(
        st.recursive(
            st.one_of(
                st.none(),
                st.booleans(),
                st.integers(-(10**12), 10**12),
                st.floats(-1e6, 1e6, allow_nan=False).map(round_real),
                st.text(max_size=20),
            ),
            lambda children: st.one_of(
                st.lists(children, max_size=4),
                st.dictionaries(st.text(max_size=8), children, max_size=4),
            ),
            max_leaves=20,
        )
    )
    def test_parses_back_to_same_value(self, doc):
        assert json.loads(canonical_json(doc)) == doc
