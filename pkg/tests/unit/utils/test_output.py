import json
import math

import numpy as np
import pytest

import gems_select.utils.output as output


class Test_get_version:
    def test_returns_metadata_version(self, monkeypatch):
        monkeypatch.setattr(output.importlib.metadata, "version", lambda pkg: "1.2.3")
        assert output.get_version() == "1.2.3"

    def test_package_not_installed(self, monkeypatch):
        def _raise(name):
            raise output.importlib.metadata.PackageNotFoundError()

        monkeypatch.setattr(output.importlib.metadata, "version", _raise)
        assert output.get_version() == "unknown (package not installed)"


class TestFormatting:
    @pytest.mark.parametrize(
        "value, text",
        [
            (0.1, "0.10000000000000001"),
            (16.0, "16"),
            (math.inf, "inf"),
            (-math.inf, "-inf"),
            (math.nan, "nan"),
            (None, ""),
            (True, "true"),
            (3, "3"),
            ("gems_c", "gems_c"),
        ],
    )
    def test_format_number(self, value, text):
        assert output.format_number(value) == text

    def test_seventeen_digits_recover_the_float(self):
        x = 1.0 / 3.0
        assert float(output.format_number(x)) == x

    def test_to_jsonable(self):
        data = {"a": [math.inf, 1.0], "b": np.array([1.0, 2.0]), 3: (math.nan,)}
        assert output.to_jsonable(data) == {"a": ["inf", 1.0], "b": [1.0, 2.0], "3": ["nan"]}

    def test_dumps_is_strict_and_sorted(self):
        text = output.dumps({"b": math.inf, "a": 1})
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": 1, "b": "inf"}

    def test_error_object(self):
        assert output.error_object(ValueError("bad")) == {"error": "ValueError", "message": "bad"}

    def test_provenance_header_has_no_timestamp(self, monkeypatch):
        monkeypatch.setattr(output, "get_version", lambda: "9.9.9")
        header = output.provenance_header("abc", 7, "run")
        assert header == {"command": "run", "config_hash": "abc", "seed": 7, "version": "9.9.9"}


class TestWriters:
    HEADER = {"command": "complexity", "config_hash": "abc", "seed": 0, "version": "x"}

    def test_csv_header_comments(self, tmp_path):
        path = output.write_csv(
            tmp_path / "t.csv", self.HEADER, ("d", "rho"), [{"d": 1, "rho": math.inf}]
        )
        lines = path.read_text().splitlines()
        assert lines[:4] == [
            "# command: complexity",
            "# config_hash: abc",
            "# seed: 0",
            "# version: x",
        ]
        assert lines[4:] == ["d,rho", "1,inf"]

    def test_missing_column_is_empty(self, tmp_path):
        path = output.write_csv(tmp_path / "t.csv", {}, ("d", "rho"), [{"d": 2}])
        assert path.read_text().splitlines() == ["d,rho", "2,"]

    @pytest.mark.parametrize(
        "fmt, names", [("json", ["r.json"]), ("csv", ["r.csv"]), ("both", ["r.json", "r.csv"])]
    )
    def test_write_report_formats(self, tmp_path, fmt, names):
        out = tmp_path / "out"
        paths = output.write_report(out, "r", fmt, self.HEADER, {"rows": []}, ("d",), [])
        assert [p.name for p in paths] == names

    def test_json_body_carries_header(self, tmp_path):
        path = output.write_json(tmp_path / "r.json", self.HEADER, {"value": 0.5})
        data = json.loads(path.read_text())
        assert data["header"]["command"] == "complexity"
        assert data["value"] == 0.5
