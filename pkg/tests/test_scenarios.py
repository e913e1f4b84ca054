import csv
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

from pairgraph.elements import ModeShifter, PhaseShifter
from pairgraph.scenarios import (
    SCENARIOS,
    SpecError,
    UnknownScenario,
    build_graph,
    build_steps,
    data_text,
    emit,
    emit_spec,
    load_specs,
    parse_spec,
    run_scenario,
    run_spec,
)
from pairgraph.scenarios.spec_format import evaluate

GOLDEN_DIR = Path(__file__).parent / "goldens" / "scenarios"
ALL_FILES = sorted({f for s in SCENARIOS.values() for f in s.files})

MINIMAL = """
[paths]
a b
[crystals]
a H b H 1 0
[detection]
a=1 b=1
"""


def diagnostics(text):
    with pytest.raises(SpecError) as info:
        parse_spec(text)
    return info.value.diagnostics


def test_fig3_file_layout():
    spec = parse_spec(data_text("fig3.exp"))
    assert len(spec.crystals) == 4
    phases = [e for e in spec.elements if isinstance(e.op, PhaseShifter)]
    assert len(phases) == 1 and phases[0].after == "III"
    assert spec.options["sweep"] == "0:2*pi:25"
    steps = build_steps(spec)
    assert isinstance(steps[1], PhaseShifter)


def test_undeclared_path_is_named():
    diags = diagnostics(MINIMAL.replace("a H b H 1 0", "a H z H 1 0"))
    assert any("'z'" in d.message and d.line == 5 for d in diags)


def test_unknown_element_kind():
    diags = diagnostics(MINIMAL + "[elements]\nwarp a\n")
    assert any("unknown element kind" in d.message for d in diags)


def test_non_bijective_label_map():
    diags = diagnostics(MINIMAL + "[elements]\nmode a H:V V:V\n")
    assert any("bijection" in d.message for d in diags)


def test_odd_detection_total():
    diags = diagnostics(MINIMAL.replace("a=1 b=1", "a=1"))
    assert any("odd" in d.message for d in diags)
    diags = diagnostics(MINIMAL.replace("a=1 b=1", "subsets 3"))
    assert any("odd" in d.message for d in diags)


def test_all_errors_reported_together():
    text = MINIMAL.replace("a H b H 1 0", "a H z H 1 0") + "[elements]\nwarp a\n[bogus]\n"
    assert len(diagnostics(text)) == 3


def test_order_too_low_for_fock():
    diags = diagnostics(MINIMAL + "[options]\norder = 0\noutputs = fock\n")
    assert any(d.field == "options.order" for d in diags)


def test_undefined_parameter():
    diags = diagnostics(MINIMAL.replace("a H b H 1 0", "a H b H 1 $theta"))
    assert any("theta" in d.message for d in diags)


def test_expressions():
    params = {"a1": "-1.5", "x": "a1*2"}
    assert evaluate("pi/2", {}) == pytest.approx(math.pi / 2)
    assert evaluate("a1+$x", params) == pytest.approx(-4.5)
    with pytest.raises(ValueError):
        evaluate("__import__('os')", {})


def test_mode_shifter_parsing():
    spec = parse_spec(MINIMAL + "[elements]\nmode a affine -1 2 phase=pi/2\nmode b H:V V:H\n")
    ops = [e.op for e in spec.elements]
    assert isinstance(ops[0], ModeShifter) and ops[0].phase == pytest.approx(math.pi / 2)
    assert ops[1].label_map == {"H": "V", "V": "H"}


@pytest.mark.parametrize("filename", ALL_FILES)
def test_round_trip(filename):
    spec = parse_spec(data_text(filename), "x")
    again = parse_spec(emit_spec(spec), "x")
    assert again == spec


def test_round_trip_without_raw_tokens():
    spec = parse_spec(MINIMAL + "[elements]\nbs a b mirror\nphase a 0.25\n")
    for e in spec.elements:
        e.raw = ()
    again = parse_spec(emit_spec(spec))
    assert [e.op for e in again.elements] == [e.op for e in spec.elements]


def test_unknown_scenario():
    with pytest.raises(UnknownScenario):
        run_scenario("nope")


def test_perm_network_adjacency_rounds_to_printed():
    from tests.test_matrix import U_P

    report = run_scenario("permanent_network")
    (adj,) = report.of_kind("adjacency")
    m = np.array(adj.data["matrix"])
    assert adj.data["paths"] == ["a", "c", "e", "b", "d", "f"]
    np.testing.assert_array_equal(np.round(m.real, 4), U_P.real)
    np.testing.assert_array_equal(np.round(m.imag, 4), U_P.imag)


def test_perm_histogram_csv():
    text = emit(run_scenario("permanent_network"), "csv")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert text.splitlines()[0] == "pattern,probability"
    assert len(rows) == 15
    assert sum(float(r["probability"]) for r in rows) == pytest.approx(1, abs=1e-9)


def test_empty_state_zero_rows():
    spec = parse_spec(MINIMAL.replace("a=1 b=1", "a=2"))
    report = run_spec(spec)
    assert emit(report, "csv") == "pattern,probability\na:2,0.0\n"
    records = [json.loads(x) for x in emit(report, "json-lines").splitlines()]
    assert [r for r in records if r.get("result") == "state"] == []
    assert "(empty)" in emit(report, "table")


def test_json_lines_complex_format():
    lines = emit(run_scenario("multiport_ghz3"), "json-lines").splitlines()
    head = json.loads(lines[0])
    assert head["conventions"]["beam_splitter"].startswith("transmission 1/sqrt(2)")
    states = [json.loads(x) for x in lines[1:] if json.loads(x)["result"] == "state"]
    assert len(states) == 3
    for r in states:
        assert {"assignment", "re", "im"} <= set(r)
        assert r["im"] == pytest.approx(-1 / math.sqrt(3) * (1 if r["assignment"] != [3, 1, 1] else -1), abs=1e-11)
        assert len(repr(abs(r["im"])).replace("0.", "")) <= 12


def test_rates_output_two_rows():
    spec = parse_spec(MINIMAL + "[options]\noutputs = rates\n")
    (res,) = run_spec(spec).of_kind("rates")
    ratios = [r["ratio"] for r in res.data["rows"]]
    assert ratios[0] == pytest.approx(357, rel=0.02) and ratios[1] == pytest.approx(2.52e4, rel=0.02)


def test_conventions_block_present():
    for name in SCENARIOS:
        conv = run_scenario(name).conventions
        assert {"beam_splitter", "prune_threshold", "cancel_threshold", "seed"} <= set(conv)


def test_sweep_jobs_deterministic():
    (spec,) = load_specs("frustrated_network")
    one = emit(run_spec(spec, sweep="0:pi:5", jobs=1), "json-lines")
    two = emit(run_spec(spec, sweep="0:pi:5", jobs=2), "json-lines")
    assert one == two


def test_loss_override_validated():
    (spec,) = load_specs("frustrated_network")
    with pytest.raises(ValueError):
        run_spec(spec, loss=2.0)


def test_hom_scenario():
    report = run_scenario("hom")
    states = {(r.spec, r.data["pattern"]): r.data for r in report.of_kind("state")}
    assert states[("hom", "ab")]["terms"] == []
    bunched = [abs(states[("hom", p)]["terms"][0][1]) for p in ("a:2", "b:2")]
    assert bunched[0] == pytest.approx(bunched[1])
    n_terms = sum(len(states[("hom_distinguishable", p)]["terms"]) for p in ("ab", "a:2", "b:2"))
    assert n_terms == 4


def test_pbs_demo():
    report = run_scenario("pbs_demo")
    states = {(r.spec, r.data["pattern"]): r.data["terms"] for r in report.of_kind("state")}
    assert states[("pbs_hh", "ab")] == [(["H", "H"], 1)]
    assert states[("pbs_hv", "b:2")] == [([("H", "V")], 1j)]


def test_graph_of_spec_matches_direct_construction():
    spec = parse_spec(data_text("entanglement_swapping.exp"))
    g = build_graph(spec)
    assert g.paths == ("a", "b", "c", "d")
    # each crystal has one photon entering the splitter: two descendants apiece
    assert len(g.edges) == 8


def _snapshot(name):
    report = run_scenario(name)
    report.conventions.pop("backend")
    return emit(report, "json-lines")


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_scenario_goldens(name, update_goldens):
    path = GOLDEN_DIR / f"{name}.jsonl"
    text = _snapshot(name)
    if update_goldens:
        path.write_text(text)
    assert path.exists(), f"missing golden {path.name}; run pytest --update-goldens"
    assert text == path.read_text()
    assert _snapshot(name) == text
