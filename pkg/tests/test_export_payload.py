"""Testing result rendering"""

import json
import math
from fractions import Fraction

import numpy as np

from tools.entropy import EntropyRecord
from tools.export_payload import export_all, export_csv, export_json, normalize, render_float


def test_render_float():
    assert render_float(0.1 + 0.2) == 0.3
    assert render_float(math.nan) == "nan"
    assert render_float(-math.inf) == "-inf"
    assert render_float(1 / 3) == 0.333333333333333


def test_normalize():
    data = normalize({
        "m": 1 + 2j,
        "w": np.array([1.0, 2.0]),
        "half": Fraction(1, 2),
        "n": np.int64(3),
        "ok": np.bool_(True),
        "record": EntropyRecord(I=1.0, J=0.0, K=0.0, route="exact-tail"),
    })
    assert data["m"] == {"re": 1.0, "im": 2.0}
    assert data["w"] == [1.0, 2.0]
    assert data["half"] == 0.5
    assert data["n"] == 3 and data["ok"] is True
    assert data["record"]["route"] == "exact-tail"


def test_export_json_is_stable():
    payload = {"command": "entropy", "records": [{"K": 0.1157464, "J": -math.inf}]}
    text = export_json(payload)
    assert text.endswith("\n")
    assert text == export_json(payload)
    assert json.loads(text)["records"][0]["J"] == "-inf"


def test_export_csv_splits_complex():
    rows = [{"x": -1.0, "m": 1j}, {"x": 1.0, "m": 2 + 1j, "note": [1, 2]}]
    lines = export_csv(rows).splitlines()
    assert lines[0] == "x,m_re,m_im,note"
    assert lines[1] == "-1.0,0.0,1.0,"
    assert lines[2] == '1.0,2.0,1.0,"[1, 2]"'


def test_export_all(tmp_path):
    paths = export_all({"value": 1.5}, [{"n": 0, "term": 0.5}], str(tmp_path / "out"), "bump")
    with open(paths["json"], encoding="utf-8") as f:
        assert json.load(f) == {"value": 1.5}
    with open(paths["csv"], encoding="utf-8") as f:
        assert f.read() == "n,term\n0,0.5\n"
