import json

import pytest

from toricount.fanfile import FanFile, FanFileError
from toricount.toric import catalog

P2_TEXT = json.dumps({"name": "P2", "rays": [[1, 0], [0, 1], [-1, -1]], "max_cones": [[0, 1], [0, 2], [1, 2]]})


class TestParse:
    def test_valid(self):
        """Test that a complete P2 file parses to the catalog fan."""
        fan_file = FanFile.parse(P2_TEXT)
        assert fan_file.name == "P2"
        assert fan_file.to_fan() == catalog("P2")

    def test_name_is_optional(self):
        """Test a file without a name parses with the empty name and still builds its fan."""
        fan_file = FanFile.parse('{"rays": [[1], [-1]], "max_cones": [[0], [1]]}')
        assert fan_file.name == ""
        assert fan_file.to_fan().rays == ((1,), (-1,))
        assert fan_file.to_fan().name == ""
        assert json.loads(fan_file.dumps())["name"] == ""

    @pytest.mark.parametrize(
        "raw, message",
        [
            ({"rays": [[1]], "max_cones": [[0]], "weights": [1]}, "unknown fields: weights"),
            ({"rays": [[1]]}, "missing fields: max_cones"),
            ({"name": 3, "rays": [[1]], "max_cones": [[0]]}, "'name' must be a string"),
            ({"rays": [], "max_cones": []}, "must not be empty"),
            ({"rays": [[1, 0], [1]], "max_cones": []}, "same length"),
            ({"rays": [[1, 0], [1, 0]], "max_cones": []}, "duplicate"),
            ({"rays": [[1, 0], [0, 1]], "max_cones": [[0, 2]]}, "outside 0..1"),
            ({"rays": [[1, "0"]], "max_cones": []}, r"'rays\[0\]' must be a list of integers"),
            ({"rays": [[True]], "max_cones": []}, "must be a list of integers"),
            ({"rays": {"a": 1}, "max_cones": []}, "'rays' must be a list"),
            ([1, 2], "root must be an object"),
        ],
    )
    def test_errors(self, raw, message):
        """Test that each malformed field is reported with its own message."""
        with pytest.raises(FanFileError, match=message):
            FanFile.parse(json.dumps(raw))

    def test_invalid_json(self):
        """Test that text which is not JSON is rejected."""
        with pytest.raises(FanFileError, match="invalid JSON"):
            FanFile.parse("{rays: [")

    def test_structure_is_not_validated_here(self):
        """Test that an incomplete fan still parses."""
        # completeness is a validation question, not a parse error
        fan_file = FanFile.parse('{"rays": [[1, 0], [0, 1], [-1, -1]], "max_cones": [[0, 1]]}')
        assert len(fan_file.max_cones) == 1


class TestFiles:
    def test_save_and_load(self, tmp_path):
        """Test that a saved fan file loads back to the same fan."""
        path = tmp_path / "p2.json"
        FanFile.from_fan(catalog("P2")).save(str(path))
        assert json.loads(path.read_text(encoding="utf-8"))["rays"] == [[1, 0], [0, 1], [-1, -1]]
        assert FanFile.load(str(path)).to_fan() == catalog("P2")

    def test_dumps(self):
        """Test the serialized form of the P1 fan."""
        text = FanFile.from_fan(catalog("P1")).dumps()
        assert text.endswith("\n")
        assert json.loads(text) == {"name": "P1", "rays": [[1], [-1]], "max_cones": [[0], [1]]}

    def test_missing_file(self, tmp_path):
        """Test that loading an absent path raises FanFileError."""
        with pytest.raises(FanFileError, match="cannot read"):
            FanFile.load(str(tmp_path / "absent.json"))
