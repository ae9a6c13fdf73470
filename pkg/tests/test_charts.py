import json
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from k2local import charts as ch

E2 = ch.hfpss_e2()
SCENARIOS = dict((s.label, (s, p)) for s, p in ch.d3_scenarios(E2))

E2_POSITIONS = {
    "x_{0,0}": (0, 0), "x_{1,0}": (1, -1), "x_{1,2}": (1, 1), "x_{1,4}": (1, 3), "zeta x_{0,0}": (1, -1),
    "x_{2,2}": (2, 0), "x_{2,4}": (2, 2), "x_{2,6}": (2, 4), "zeta x_{1,0}": (2, -2),
    "zeta x_{1,2}": (2, 0), "zeta x_{1,4}": (2, 2), "x_{3,0}": (3, -3), "zeta x_{2,2}": (3, -1),
    "zeta x_{2,4}": (3, 1), "zeta x_{2,6}": (3, 3), "zeta x_{3,0}": (4, -4),
}


def exterior_by_enumeration(stems):
    counts = [0] * 6
    for r in range(len(stems) + 1):
        for subset in combinations(stems, r):
            counts[sum(subset) % 6] += 1
    return tuple(counts)


def test_e2_classes_frozen():
    assert {c.name: (c.s, c.stem) for c in E2.classes} == E2_POSITIONS
    assert E2.count() == 16


def test_scenario_counts():
    assert SCENARIOS["A"][1].count() == 16
    assert SCENARIOS["B"][1].count() == 14
    killed = set(E2.by_name()) - set(SCENARIOS["B"][1].by_name())
    assert killed == {"x_{1,4}", "zeta x_{3,0}"}


def test_scenario_a_matches_exterior_algebra():
    table = ch.homotopy_table(SCENARIOS["A"][1])
    assert table == (3, 2, 3, 3, 2, 3)
    assert table == exterior_by_enumeration((1, 3, 5, -1))
    assert ch.exterior_ranks() == exterior_by_enumeration((1, 3, 5, -1))


@pytest.mark.parametrize("label", ["A", "B"])
def test_bottom_cell_ruled_out(label):
    scenario, page = SCENARIOS[label]
    d = [d for d in scenario.d3_list if d.source == "x_{0,0}"]
    assert len(d) == 1 and d[0].status == "ruled_out"
    assert "x_{0,0}" in page.by_name()


@pytest.mark.parametrize("label", ["A", "B"])
def test_differential_bidegrees(label):
    scenario, _ = SCENARIOS[label]
    assert all(ch.differential_bidegree_ok(E2, d) for d in scenario.d3_list)


def test_bidegree_rejects_wrong_target():
    bad = ch.Differential("x_{0,0}", "x_{2,2}", "possible", "wrong bidegree")
    assert not ch.differential_bidegree_ok(E2, bad)


def test_extensions_annotated_not_resolved():
    anns = ch.extension_annotations()
    assert sorted(a.status for a in anns) == ["open"] * 6 + ["ruled_out"] * 3
    assert all(ch.extension_bidegree_ok(E2, a) for a in anns)


@pytest.mark.parametrize("label", ["A", "B"])
@pytest.mark.parametrize("fmt", list(ch.FORMATS))
def test_emit_deterministic(label, fmt):
    page = ch.scenario_page(label)
    assert ch.emit_chart(page, fmt) == ch.emit_chart(ch.scenario_page(label), fmt)


@pytest.mark.parametrize("label", ["A", "B"])
def test_json_round_trip_byte_stable(label):
    text = ch.emit_chart(ch.scenario_page(label), "json")
    again = ch.emit_chart(ch.parse_chart_json(text), "json")
    assert again == text
    assert json.loads(text)["period"] == 6


def test_svg_arrows():
    svg = ch.emit_chart(ch.scenario_page("B"), "svg")
    assert svg.startswith("<svg") and svg.count('class="d3"') == 3


def test_unknown_format():
    with pytest.raises(ch.ChartError):
        ch.emit_chart(E2, "png")


@given(st.integers(-20, 20), st.integers(0, 3), st.booleans())
def test_class_position_parses_names(shift, s, zeta):
    degree = 2 * (shift % 4)
    c = ch._class(s, degree, zeta)
    assert ch.class_position(c.name) == (c.s, c.stem)
    assert c.v2_orbit == c.stem % 6
