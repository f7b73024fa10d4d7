import json
import re
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from troprefine import cli
from troprefine.errors import ParseError
from troprefine.laurent import LaurentPoly, from_json, parse, to_json
from troprefine.tropcurve import curve_from_json, curve_to_json, single_vertex_curve

from conftest import QUARTIC, QUARTIC_VALUE_TEXT, TRI2

QUARTIC_JSON = json.dumps({"vectors": [list(v) for v in QUARTIC]})
TRI2_JSON = json.dumps({"vectors": [list(v) for v in TRI2]})


def _run(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# ------------------------------------------------------------- commands

def test_g1_quartic_text(capsys, tmp_path):
    path = tmp_path / "quartic.json"
    path.write_text(QUARTIC_JSON)
    code, out, _ = _run(capsys, "g1", "--degree", str(path), "--parity", "0,1", "--seed", "1")
    assert code == 0 and out.strip() == QUARTIC_VALUE_TEXT


def test_g1_oracle_method_agrees(capsys):
    code, out, _ = _run(capsys, "g1", "--degree", QUARTIC_JSON, "--parity", "0,1", "--method", "oracle")
    assert code == 0 and out.strip() == QUARTIC_VALUE_TEXT


def test_g0_three_ends(capsys):
    code, out, _ = _run(capsys, "g0", "--degree", TRI2_JSON)
    assert code == 0 and out.strip() == "q^2 - q^-2"


def test_json_output(capsys):
    code, out, _ = _run(capsys, "g1", "--degree", QUARTIC_JSON, "--parity", "0,1", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert from_json(payload["result"]) == parse(QUARTIC_VALUE_TEXT)
    assert payload["curves"] == 1 and payload["constraint_dependent"] is False
    assert payload["empty_direction_set"] is False


def test_output_is_byte_identical(capsys):
    argv = ("g1", "--degree", QUARTIC_JSON, "--parity", "0,1", "--format", "json")
    assert _run(capsys, *argv) == _run(capsys, *argv)


@pytest.mark.parametrize("argv", [
    ("g1", "--degree", QUARTIC_JSON),
    ("check", "--degree", QUARTIC_JSON),
    ("g0", "--degree", TRI2_JSON, "--parity", "0,1"),
    ("g1", "--degree", QUARTIC_JSON, "--parity", "0,0"),
    ("g1", "--degree", QUARTIC_JSON, "--parity", "2,1"),
    ("g1", "--degree", "[[-1,0],[0,-1],[1,1]]", "--parity", "0,1"),
    ("g0", "--degree", "[[2,0],[0,2]]"),
    ("g0", "--degree", "{not json"),
    ("frobnicate",),
])
def test_validation_errors_exit_2(capsys, argv):
    code, out, err = _run(capsys, *argv)
    assert code == 2 and out == ""


def test_zero_vector_is_a_parse_error(capsys):
    code, _, err = _run(capsys, "g0", "--degree", '{"vectors": [[0,0],[-2,0],[2,0]]}')
    assert code == 2
    assert json.loads(err)["error"] == "ParseError"


def test_check_passes_on_quartic(capsys):
    code, out, _ = _run(capsys, "check", "--degree", QUARTIC_JSON, "--parity", "0,1")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines and all(line.startswith(("PASS", "INFO")) for line in lines)
    assert "INFO invariant is symmetric under q -> 1/q" in lines


def test_check_failure_exits_3(capsys, monkeypatch):
    real = cli.cross_validate

    def failing(*args, **kwargs):
        rep = real(*args, **kwargs)
        rep.record(False, "injected")
        return rep

    monkeypatch.setattr(cli, "cross_validate", failing)
    code, out, _ = _run(capsys, "check", "--degree", TRI2_JSON, "--parity", "0,1")
    assert code == 3 and "FAIL injected" in out


def test_mult_of_supplied_curve(capsys, quartic_curve):
    code, out, _ = _run(capsys, "mult", "--curve", json.dumps(curve_to_json(quartic_curve)))
    assert code == 0 and out.strip() == QUARTIC_VALUE_TEXT
    code, _, _ = _run(capsys, "mult", "--curve", json.dumps(curve_to_json(quartic_curve)), "--parity", "1,0")
    assert code == 2


# ----------------------------------------------------------- payloads

def test_degree_payload():
    deg = cli.degree_from_json(json.loads(QUARTIC_JSON))
    assert sorted((v.x, v.y) for v in deg.vectors) == sorted(QUARTIC)
    assert cli.degree_from_json(cli.degree_to_json(deg)) == deg
    for bad in ({"vectors": [[1, 2, 3], [-1, -2]]}, {"vectors": [[1.5, 0], [-1.5, 0]]}, {}, [], "x"):
        with pytest.raises(ParseError):
            cli.degree_from_json(bad)


def test_parity_parsing():
    assert cli.parse_parity("0,1") == (0, 1) and cli.parse_parity(" 1, 1") == (1, 1)
    for bad in ("0", "1,2", "a,b"):
        with pytest.raises(ParseError):
            cli.parse_parity(bad)


def test_curve_payload_uses_rational_strings(quartic_curve):
    payload = curve_to_json(quartic_curve)
    text = json.dumps(payload)
    assert all(isinstance(c, str) for v in payload["vertices"] for c in v["position"])
    assert curve_from_json(json.loads(text)).canonical_key() == quartic_curve.canonical_key()


coeffs = st.dictionaries(st.integers(-40, 40), st.integers(-9, 9).filter(bool), max_size=8)


@settings(max_examples=200, deadline=None)
@given(coeffs)
def test_polynomial_payload_round_trip(terms):
    poly = LaurentPoly(terms)
    assert from_json(json.loads(json.dumps(to_json(poly)))) == poly


# ------------------------------------------------------------------ SVG

def test_quartic_svg(tmp_path, capsys, quartic_curve):
    path = tmp_path / "q.svg"
    code, _, _ = _run(capsys, "render", "--degree", QUARTIC_JSON, "--parity", "0,1", "--out", str(path))
    assert code == 0
    svg = path.read_text()
    assert svg.count('class="end"') == 6
    assert svg.count('class="cycle"') == 1 and "<polygon" in svg
    # rendering the same curve from its JSON gives the same bytes
    again = tmp_path / "again.svg"
    _run(capsys, "render", "--curve", json.dumps(curve_to_json(quartic_curve)), "--out", str(again))
    assert again.read_bytes() == path.read_bytes()


def test_single_vertex_svg():
    svg = cli.curve_svg(single_vertex_curve(TRI2))
    assert svg.count('class="end"') == 3 and 'class="cycle"' not in svg
    assert cli.curve_svg(single_vertex_curve(TRI2)) == svg


def test_quartic_subdivision_svg(quartic_curve):
    svg = cli.subdivision_svg(quartic_curve, (0, 1))
    cells = re.findall(r'<polygon class="(?:triangle|parallelogram)[^"]*"[^>]*points="([^"]+)"', svg)
    total = Fraction(0)
    xs, ys = set(), set()
    for pts in cells:
        corners = [tuple(Fraction(c) for c in p.split(",")) for p in pts.split()]
        n = len(corners)
        total += abs(sum(corners[i][0] * corners[(i + 1) % n][1] - corners[(i + 1) % n][0] * corners[i][1]
                         for i in range(n)))
        xs |= {c[0] for c in corners}
        ys |= {c[1] for c in corners}
        assert all(c[0] >= 0 and c[1] >= 0 and c[0] + c[1] <= 4 for c in corners)
    # six triangles whose doubled areas add up to the doubled area of conv{(0,0),(4,0),(0,4)}
    assert len(cells) == 6 and total == 16
    assert min(xs) == 0 and max(xs) == 4 and min(ys) == 0 and max(ys) == 4


def test_unwritable_path(tmp_path, capsys, quartic_curve):
    target = tmp_path / "missing" / "dir" / "x.svg"
    code, _, err = _run(capsys, "render", "--curve", json.dumps(curve_to_json(quartic_curve)), "--out", str(target))
    assert code == 1 and json.loads(err)["error"] == "IOError"
