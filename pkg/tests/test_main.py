"""Testing the command line"""

import json

import pytest

import main


def _run(capsys, *argv):
    code = main.run(list(argv))
    return code, capsys.readouterr().out


def test_parse_grid():
    assert main.parse_grid("-1:1:3").tolist() == [-1.0, 0.0, 1.0]
    for bad in ("1:2", "a:b:3", "0:1:0", "0:inf:3"):
        with pytest.raises(main.SpecError):
            main.parse_grid(bad)


def test_entropy(capsys, corpus_path):
    code, out = _run(capsys, "entropy", "--input", corpus_path("bump"))
    assert code == 0
    payload = json.loads(out)
    assert payload["command"] == "entropy"
    exact, quad = payload["records"]
    assert exact["route"] == "exact-tail"
    assert exact["K"] == pytest.approx(0.1157, abs=1e-4)
    assert payload["route_difference"] < 1e-4


def test_simulate_csv(capsys, corpus_path):
    code, out = _run(capsys, "simulate", "--input", corpus_path("constant"), "--grid", "-1:1:3", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "x,y,m_re,m_im,radius,route"
    assert lines[1] == "-1.0,1.0,0.0,2.0,0.0,exact-tail"
    assert len(lines) == 4


def test_simulate_is_independent_of_threads(capsys, monkeypatch, corpus_path):
    outputs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("CANON_SZEGO_THREADS", threads)
        code, out = _run(capsys, "simulate", "--input", corpus_path("bump"), "--grid", "-3:3:13")
        assert code == 0
        outputs.append(out)
    assert outputs[0] == outputs[1]


def test_density_needs_eps_without_det_positive_tail(capsys, corpus_path):
    code, _ = _run(capsys, "density", "--input", corpus_path("stieltjes_hamiltonian"))
    assert code == 4
    code, out = _run(capsys, "density", "--input", corpus_path("stieltjes_hamiltonian"),
                     "--eps", "0.01", "--grid", "0.5:0.5:1")
    assert code == 0
    assert json.loads(out)["records"][0]["w"] > 0


def test_szego(capsys, corpus_path):
    code, out = _run(capsys, "szego", "--input", corpus_path("bump"), "--nmax", "4")
    assert code == 0
    payload = json.loads(out)
    assert payload["value"] == 0.5
    assert payload["eta"] == [0, 1, 2, 3, 4]


def test_szego_hypothesis_violation(capsys, corpus_path):
    code, _ = _run(capsys, "szego", "--input", corpus_path("stieltjes_hamiltonian"))
    assert code == 3


def test_a2(capsys, corpus_path):
    code, out = _run(capsys, "a2", "--input", corpus_path("bump"))
    assert code == 0
    payload = json.loads(out)
    assert payload["a2l1"] == 0.125
    assert payload["szego_over_a2l1"] == 4.0
    assert payload["l1_identity_residual"] == 0.0
    assert payload["p1"]["holds"] is True


def test_string_convert(capsys, corpus_path):
    code, out = _run(capsys, "string", "--action", "convert", "--input", corpus_path("stieltjes"))
    assert code == 0
    payload = json.loads(out)
    assert payload["kind"] == "hamiltonian"
    assert payload["breakpoints"] == [0, 1, 2]


def test_string_convert_needs_unit_trace(capsys, corpus_path):
    code, _ = _run(capsys, "string", "--action", "convert", "--input", corpus_path("bump"))
    assert code == 2
    code, out = _run(capsys, "string", "--action", "convert", "--normalize", "--input", corpus_path("bump"))
    assert code == 0
    assert json.loads(out)["kind"] == "string"


def test_string_q(capsys, corpus_path):
    code, out = _run(capsys, "string", "--action", "q", "--input", corpus_path("stieltjes"), "--grid", "-1:-1:1")
    assert code == 0
    row = json.loads(out)["records"][0]
    assert row["q"] == {"re": 2.0, "im": 0.0}
    assert row["q_hamiltonian"]["re"] == pytest.approx(2.0, abs=1e-12)


def test_string_q_off_the_spectrum(capsys, corpus_path):
    code, _ = _run(capsys, "string", "--action", "q", "--input", corpus_path("stieltjes"), "--grid", "0:1:2")
    assert code == 2


def test_string_characteristic(capsys, corpus_path):
    code, out = _run(capsys, "string", "--action", "characteristic", "--input", corpus_path("unit_density_atom"))
    assert code == 0
    assert json.loads(out)["value"] == 2


def test_string_analyze_pure_point(capsys, corpus_path):
    code, out = _run(capsys, "string", "--input", corpus_path("stieltjes"))
    assert code == 0
    payload = json.loads(out)
    assert payload["log_integral"] == "-inf"
    assert "t_points" not in payload


def test_truncated_input_exits_with_2(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"breakpoints": [0, 1], "h1": [2,', encoding="utf-8")
    code, out = _run(capsys, "entropy", "--input", str(path))
    assert code == 2
    assert out == ""


def test_missing_input_exits_with_2(capsys):
    code, _ = _run(capsys, "simulate")
    assert code == 2


def test_output_file(capsys, tmp_path, corpus_path):
    target = tmp_path / "bump.json"
    code, out = _run(capsys, "szego", "--input", corpus_path("bump"), "--output", str(target))
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text(encoding="utf-8"))["value"] == 0.5


def test_entropy_with_indivisible_tail(capsys, corpus_path):
    code, out = _run(capsys, "entropy", "--input", corpus_path("stieltjes_hamiltonian"))
    assert code == 0
    payload = json.loads(out)
    assert [r["K"] for r in payload["records"]] == ["inf", "inf"]
    assert payload["records"][0]["J"] == "-inf"
    assert payload["route_difference"] == 0.0


def test_commands_read_the_right_kind(capsys, corpus_path):
    code, _ = _run(capsys, "a2", "--input", corpus_path("stieltjes"))
    assert code == 2
    code, _ = _run(capsys, "string", "--action", "q", "--input", corpus_path("bump"))
    assert code == 2


def test_format_both(capsys, tmp_path, corpus_path):
    code, out = _run(capsys, "szego", "--input", corpus_path("bump"), "--format", "both", "--output", str(tmp_path))
    assert code == 0
    assert out == ""
    assert json.loads((tmp_path / "szego_bump.json").read_text(encoding="utf-8"))["value"] == 0.5
    assert (tmp_path / "szego_bump.csv").read_text(encoding="utf-8").startswith("n,eta,")


def test_format_both_defaults_to_the_output_dir(capsys, monkeypatch, tmp_path, corpus_path):
    monkeypatch.setenv("CANON_SZEGO_OUTPUT_DIR", str(tmp_path / "out"))
    code, _ = _run(capsys, "entropy", "--input", corpus_path("constant"), "--format", "both")
    assert code == 0
    assert sorted(p.name for p in (tmp_path / "out").iterdir()) == ["entropy_constant.csv", "entropy_constant.json"]
