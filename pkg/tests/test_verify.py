import json
import math

import pytest

from tilesys.compiler import RELAXED, CompilerOutput, compile_matrix
from tilesys.sofic import least_period_counts, presentation_of
from tilesys.verify import Budget, check_center_filling, head_spacings, verify_dynamics, verify_structural
from tilesys.automaton import build_automaton


def by_name(report):
    return {c.name: c for c in report.checks}


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_center_fillings_count_k_factorial(k):
    n = max(3, k + 1)
    c = check_center_filling(n, k)
    assert c.passed, c.detail
    assert f"{math.factorial(k)} fillings" in c.detail


@pytest.mark.parametrize("i", [0, 1, 2])
def test_center_fillings_independent_of_i(i):
    assert check_center_filling(5, 3, i).passed


def test_structural_small():
    for A, mode in (([[1]], "strict"), ([[0, 1], [1, 0]], RELAXED), ([[0]], "strict")):
        rep = verify_structural(compile_matrix(A, mode=mode))
        assert rep.passed, rep.lines()
    checks = by_name(verify_structural(compile_matrix([[1]])))
    assert "center-fillings[k=1]" in checks


def _tampered(A, mode, edit):
    doc = json.loads(compile_matrix(A, mode=mode).to_json())
    edit(doc)
    return CompilerOutput.from_dict(doc)


def test_deleted_rack_fails_counting_identity():
    out = _tampered([[0, 1], [1, 0]], RELAXED, lambda d: d["racks"].pop())
    rep = verify_structural(out)
    assert rep.status == "failed"
    c = by_name(rep)["counting-identity"]
    assert not c.passed and c.witness


def test_duplicated_rack_fails():
    out = _tampered([[1]], "strict", lambda d: d["racks"].append(dict(d["racks"][0])))
    assert not by_name(verify_structural(out))["counting-identity"].passed


def test_reshaped_rack_fails_geometry():
    def edit(d):
        offs = d["racks"][0]["offsets"]
        d["racks"][0]["offsets"] = offs[:-1] + [offs[-1] + 2] if isinstance(offs[-1], int) else offs[:-1] + [[offs[-1][0] + 2, offs[-1][1]]]

    rep = verify_structural(_tampered([[1]], "strict", edit))
    assert not by_name(rep)["geometry"].passed


def test_structural_at_scale_without_materializing():
    out = compile_matrix([[1, 1], [1, 0]], mode=RELAXED)
    assert out.racks is None
    rep = verify_structural(out, stream_limit=0)
    assert rep.passed, rep.lines()
    assert "digits" in by_name(rep)["counting-identity"].detail


def test_dynamics_single_loop():
    rep = verify_dynamics(compile_matrix([[1]]))
    assert rep.passed, rep.lines()
    checks = by_name(rep)
    assert "Fix(sigma^26) = 26" in checks["fixed-points[p=1]"].detail
    assert "1 head-aligned" in checks["block-correspondence"].detail


def test_dynamics_swap():
    out = compile_matrix([[0, 1], [1, 0]], mode=RELAXED)
    rep = verify_dynamics(out, periods=(1, 2))
    assert rep.passed, rep.lines()
    checks = by_name(rep)
    assert "Fix(sigma^39) = 0" in checks["fixed-points[p=1]"].detail
    assert "Fix(sigma^78) = 78" in checks["fixed-points[p=2]"].detail
    spacing, _ = head_spacings(build_automaton(out.prototile_set()))
    assert spacing == {39}


def test_dynamics_identity_two_orbits():
    out = compile_matrix([[1, 0], [0, 1]], mode=RELAXED)
    assert verify_dynamics(out, periods=(1,)).passed
    least = least_period_counts(presentation_of(out.prototile_set()), 39)
    assert least[39] == 78 and sum(least.values()) == 78


def test_dynamics_skip_on_scale():
    rep = verify_dynamics(compile_matrix([[1, 1], [1, 0]], mode=RELAXED))
    assert rep.status == "skipped" and "scale" in rep.reason


def test_dynamics_budget(monkeypatch):
    monkeypatch.setenv("TILESYS_MAX_LENGTH", "10")
    assert Budget.from_env().length == 10
    rep = verify_dynamics(compile_matrix([[1]]), Budget.from_env())
    assert rep.status == "skipped"
