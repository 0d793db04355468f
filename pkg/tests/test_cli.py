import json

import pytest

from tilesys.cli import format_poly, main


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


def tiles(*specs):
    return {"format": "tilesys.prototiles", "version": 1, "tiles": [dict(s) for s in specs]}


@pytest.fixture
def even(tmp_path):
    return write(tmp_path, "even.json", tiles({"name": "R", "offsets": [0]}, {"name": "B", "broken_word": "BB"}))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_even(capsys, even):
    code, out, _ = run(capsys, "analyze", even, "--periods", "3")
    assert code == 0
    assert "entropy: 0.48121182506\n" in out
    assert "tiles Z: true" in out and "fixed points: 2" in out and "Fix(sigma^3) = 5" in out
    assert "characteristic polynomial: x^2 - x - 1" in out


def test_analyze_nontiling(capsys, tmp_path):
    path = write(tmp_path, "bad.json", tiles({"name": "a", "offsets": [0, 1, 3]}))
    code, out, _ = run(capsys, "analyze", path)
    assert code == 2 and "tiles Z: false" in out


def test_analyze_single_cell(capsys, tmp_path):
    path = write(tmp_path, "one.json", tiles({"name": "a", "offsets": [0]}))
    code, out, _ = run(capsys, "analyze", path)
    assert code == 0 and "entropy: 0\n" in out and "fixed points: 1" in out


@pytest.mark.parametrize("text, where", [
    ('{"tiles": [', "line 1 column 12"),
    (json.dumps(tiles({"name": "a", "offsets": [1, 0]})), "tiles[0]"),
    (json.dumps(tiles({"name": "a", "broken_word": "a%a"})), "column 2"),
])
def test_parse_errors(capsys, tmp_path, text, where):
    code, _, err = run(capsys, "analyze", write(tmp_path, "x.json", text))
    assert code == 1 and where in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "analyze", str(tmp_path / "nope.json"))
    assert code == 1 and "nope.json" in err


def test_exports(capsys, even, tmp_path):
    auto, dot = tmp_path / "a.json", tmp_path / "a.dot"
    assert run(capsys, "analyze", even, "--export-automaton", str(auto), "--dot", str(dot))[0] == 0
    assert json.loads(auto.read_text())["metadata"]["state_count"] == 2
    assert dot.read_text().startswith("digraph")


def test_compile_and_verify(capsys, tmp_path):
    m = write(tmp_path, "one.m", "[[1]]")
    out = str(tmp_path / "one.c.json")
    code, text, _ = run(capsys, "compile", m, "--out", out)
    assert code == 0 and "n = 2\nm = 26\nbarbells: 3\nracks: 1\n" in text
    code, text, _ = run(capsys, "verify", out, "--dynamic")
    assert code == 0 and "Fix(sigma^26) = 26" in text and "FAIL" not in text


def test_compile_relaxed_to_stdout(capsys, tmp_path):
    m = write(tmp_path, "swap.m", "[[0,1],[1,0]]")
    code, text, err = run(capsys, "compile", m, "--mode", "relaxed")
    assert code == 0 and "n = 3" in err and "racks: 2" in err and "barbells: 5" in err
    assert json.loads(text)["params"]["m"] == 39


def test_compile_zero_warns(capsys, tmp_path):
    m = write(tmp_path, "zero.m", "[[0]]")
    code, text, _ = run(capsys, "compile", m, "--out", str(tmp_path / "z.json"))
    assert code == 0 and "empty system" in text


def test_compile_invalid_matrix(capsys, tmp_path):
    code, _, err = run(capsys, "compile", write(tmp_path, "bad.m", "[[1,-2],[0,1]]"))
    assert code == 1 and "negative" in err


def test_verify_tampered(capsys, tmp_path):
    m = write(tmp_path, "swap.m", "[[0,1],[1,0]]")
    out = tmp_path / "swap.json"
    run(capsys, "compile", m, "--mode", "relaxed", "--out", str(out))
    doc = json.loads(out.read_text())
    doc["racks"].pop()
    code, text, _ = run(capsys, "verify", write(tmp_path, "t.json", doc))
    assert code == 4 and "FAIL counting-identity" in text and "witness=" in text


def test_verify_skips_at_scale(capsys, tmp_path):
    m = write(tmp_path, "gold.m", "[[1,1],[1,0]]")
    out = str(tmp_path / "gold.json")
    run(capsys, "compile", m, "--mode", "relaxed", "--out", out)
    code, text, _ = run(capsys, "verify", out, "--dynamic")
    assert code == 3 and "SKIP scale" in text and "FAIL" not in text
    assert run(capsys, "verify", out)[0] == 0


def test_periodic_and_language(capsys, even):
    code, out, _ = run(capsys, "periodic", even, "-p", "3")
    assert code == 0 and out == "Fix(sigma^3) = 5\n"
    code, out, _ = run(capsys, "language", even, "-l", "2")
    assert out.split("\n")[:-1] == ["(empty word)", "R", "B", "RR", "RB", "BR", "BB"]


def test_render(capsys, even):
    code, out, _ = run(capsys, "render", even, "-w", "2")
    assert code == 0 and out.count("tiling ") == 5
    assert "  B|B |   B @ -1" in out


def test_examples(capsys):
    code, out, _ = run(capsys, "examples")
    assert code == 0
    assert [line.split()[0] for line in out.splitlines() if not line.startswith(" ")] == ["PASS"] * 5


def test_reports_deterministic(capsys, even):
    first = run(capsys, "analyze", even, "--periods", "6")
    assert run(capsys, "analyze", even, "--periods", "6") == first


def test_format_poly():
    assert format_poly([1, -1, -1]) == "x^2 - x - 1"
    assert format_poly([1, 0, -2]) == "x^2 - 2"
    assert format_poly([1, -1]) == "x - 1"
