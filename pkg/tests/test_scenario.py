import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import REFERENCE_STARTS, two_flow_state
from routerplace import (
    AnnealingSchedule,
    ChannelParams,
    ControllerParams,
    ScenarioError,
    ScenarioParseError,
    ScenarioValidationError,
    anneal,
    dump_scenario,
    load_scenario,
    parse_scenario,
    read_surface,
    read_trace,
    run_distributed,
    write_surface,
    write_trace,
)
from routerplace.scenario import shipped_scenarios

MINIMAL = {"flows": [{"tx": {"pos": [0, 0]}, "rx": {"pos": [4, 0]}, "robots": [{"pos": [2, 0]}]}]}


@pytest.mark.parametrize("name", shipped_scenarios())
def test_shipped_scenarios_load_and_round_trip(name):
    doc = load_scenario(name)
    assert doc.name == name
    again = parse_scenario(dump_scenario(doc))
    assert again == doc
    doc.network()
    doc.initial_state()
    doc.mobility_model()


def test_node_ids_follow_document_order():
    doc = load_scenario("two_flow_table3_noise1")
    specs = doc.flow_specs()
    assert [(s.tx, s.robots, s.rx) for s in specs] == [(1, (2, 3), 4), (5, (6, 7), 8)]
    assert doc.initial_state() == two_flow_state(REFERENCE_STARTS[1.0])


def test_defaults_apply():
    doc = parse_scenario(json.dumps(MINIMAL))
    assert doc.channel == ChannelParams()
    assert doc.annealing == AnnealingSchedule()
    assert doc.controller == ControllerParams()
    assert doc.seed == 0
    assert doc.mobility_model().walkers == []


def test_mobility_bounds_default_to_padded_box():
    data = dict(MINIMAL, flows=[dict(MINIMAL["flows"][0], rx={"pos": [4, 0], "mobile": True, "step": 0.5})])
    model = parse_scenario(json.dumps(data)).mobility_model()
    assert model.walkers == [3]
    assert model.endpoints[3].step == 0.5
    assert model.bounds == (-2.0, -2.0, 6.0, 2.0)


@pytest.mark.parametrize(
    "data, field",
    [
        ({"flows": []}, "flows"),
        ({}, "flows"),
        ({"flows": [{"tx": {"pos": [0, 0]}}]}, "rx"),
        (dict(MINIMAL, channel={"p_n": -1}), "p_n"),
        (dict(MINIMAL, channel={"eta": "two"}), "eta"),
        (dict(MINIMAL, annealing={"alpha": 1.5}), "alpha"),
        (dict(MINIMAL, controller={"delta": 0}), "delta"),
        (dict(MINIMAL, bogus=1), "bogus"),
        (dict(MINIMAL, format_version=2), "format_version"),
        (dict(MINIMAL, seed=-3), "seed"),
        ({"flows": [{"tx": {"pos": [0]}, "rx": {"pos": [1, 1]}}]}, "pos"),
    ],
)
def test_invalid_documents_name_the_field(data, field):
    with pytest.raises(ScenarioValidationError) as info:
        parse_scenario(json.dumps(data))
    assert field in str(info.value)


def test_syntax_error_reports_position():
    text = '{\n  "flows": [\n    {"tx": }\n  ]\n}'
    with pytest.raises(ScenarioParseError) as info:
        parse_scenario(text)
    assert info.value.line == 3


def test_nan_literal_rejected():
    with pytest.raises(ScenarioParseError):
        parse_scenario('{"flows": [{"tx": {"pos": [NaN, 0]}, "rx": {"pos": [1, 0]}}]}')


def test_missing_file_raises_file_not_found(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_scenario(tmp_path / "nope.json")


@settings(max_examples=300, deadline=None)
@given(st.data())
def test_corrupted_documents_never_crash(data):
    text = dump_scenario(load_scenario("four_flow_mobile"))
    pos = data.draw(st.integers(0, len(text) - 1))
    junk = data.draw(st.text(min_size=0, max_size=3))
    corrupted = text[:pos] + junk + text[pos + data.draw(st.integers(0, 3)):]
    try:
        parse_scenario(corrupted)
    except ScenarioError:
        pass


def test_distributed_trace_round_trip(tmp_path, two_flow, unit_channel):
    _, trace = run_distributed(two_flow_state(REFERENCE_STARTS[1.0]), unit_channel,
                               ControllerParams(max_iterations=5), None, two_flow)
    path = write_trace(trace, tmp_path / "t.csv")
    rows = read_trace(path)
    assert len(rows) == 8 * len(trace)
    first = trace.records[0]
    assert rows[0].global_min_sinr == pytest.approx(first.global_cost, rel=1e-11)
    assert rows[0].flow_min_sinr == pytest.approx(first.flow_costs, rel=1e-11)
    positions = np.array([(r.x, r.y) for r in rows[-8:]])
    np.testing.assert_allclose(positions, trace.records[-1].state.positions, rtol=1e-11, atol=1e-12)


def test_one_iteration_anneal_trace_has_header_and_eight_rows(tmp_path, two_flow, unit_channel):
    _, trace = anneal(two_flow_state(REFERENCE_STARTS[1.0]), AnnealingSchedule(iterations=1), unit_channel,
                      two_flow, seed=0)
    path = write_trace(trace, tmp_path / "t.csv", two_flow, unit_channel)
    lines = path.read_text().splitlines()
    assert lines[0] == "#format_version=1"
    assert lines[1] == "iteration,node_id,x,y,flow_min_sinr_1,flow_min_sinr_2,global_min_sinr"
    assert len(lines) == 2 + 8
    with pytest.raises(ValueError):
        write_trace(trace, tmp_path / "u.csv")


def test_surface_round_trip(tmp_path):
    grid = np.array([[0.1, 0.2], [0.3, 0.4]])
    path = write_surface(grid, ([0.0, 1.0], [0.0, 0.5]), tmp_path / "s.csv")
    lines = path.read_text().splitlines()
    assert lines[1] == "param1,param2,min_sinr"
    assert len(lines) == 2 + 4
    a, b, back = read_surface(path)
    np.testing.assert_array_equal(a, [0, 1])
    np.testing.assert_array_equal(b, [0, 0.5])
    np.testing.assert_array_equal(back, grid)


def test_surface_shape_mismatch(tmp_path):
    with pytest.raises(ValueError):
        write_surface(np.zeros((2, 3)), ([0, 1], [0, 1]), tmp_path / "s.csv")
    assert not (tmp_path / "s.csv").exists()


def test_unversioned_csv_rejected(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("iteration,node_id\n0,1\n")
    with pytest.raises(ScenarioParseError):
        read_trace(p)
