import os
from fractions import Fraction

import pytest

import nodice

PROGRAMS = os.environ.get(
    "NODICE_PROGRAMS_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "programs")
)


def program(name):
    return nodice.load_file(os.path.join(PROGRAMS, name))


def test_infer_single_value():
    p = nodice.load("if flip(0.5) then flip(0.75) else false")
    [r] = nodice.infer(p, "true")
    assert r["value"] == "true"
    assert r["probability"] == pytest.approx(0.375, abs=1e-6)
    assert r["mdp_states_post"] <= r["mdp_states_pre"]


def test_infer_all_values_matches_oracle():
    p = program("tuple_observe.nd")
    assert p.type == "(bool, bool)"
    assert p.flips == 2
    results = nodice.infer(p, method="both")
    assert [r["value"] for r in results] == p.values()
    for r in results:
        assert r["probability"] == pytest.approx(float(nodice.oracle(p, r["value"])), abs=2e-6)


def test_oracle_is_exact():
    assert nodice.oracle(program("noncompositional.nd"), "true") == Fraction(301, 420)


def test_mdp_export_round_trip():
    p = program("pipeline_example.nd")
    text = nodice.export_mdp(p)
    assert text.startswith("STATES 5\nINITIAL 0\n")
    assert nodice.check_mdp(text, "T") == pytest.approx(0.2, abs=1e-6)


def test_generate_and_load():
    src = nodice.generate("coupon_ndet", 3)
    assert "observe" in src
    [r] = nodice.infer(nodice.load(src), "true")
    assert 0.0 <= r["probability"] <= 1.0


def test_errors():
    with pytest.raises(nodice.NodiceError, match="observe expects Bool"):
        nodice.load("observe (true, false)")
    with pytest.raises(ValueError):
        nodice.infer(nodice.load("flip(0.5)"), "(true, true)")
    with pytest.raises(ValueError):
        nodice.generate("nope", 2)
    assert "let" in nodice.load("(flip(1/3), true)").core()
