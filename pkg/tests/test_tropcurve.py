import json
from itertools import combinations

import pytest

from troprefine.errors import NoParity, NotElliptic, NotSimple
from troprefine.lattice import LatticePolygon, lattice_length, parity_of, primitive, validate_degree
from troprefine.tropcurve import (
    MIXED,
    NO_ODD_EDGES,
    ParamTropicalCurve,
    check_balancing,
    classify_cells,
    curve_from_json,
    curve_parity,
    curve_to_json,
    decompose_cycle_and_trees,
    dual_subdivision,
    genus_and_simplicity,
    single_vertex_curve,
)

from conftest import QUARTIC, TRI2

# weight-one triangle cycle; its odd edges have parities (1,0), (1,1) and (0,1)
TRIANGLE = ParamTropicalCurve(
    [(0, 0), (1, 0), (0, 1)],
    [(0, 1, (1, 0)), (1, 2, (-1, 1)), (2, 0, (0, -1))],
    [(0, (-1, -1)), (1, (2, -1)), (2, (-1, 2))],
)
# same image with every weight doubled
EVEN_TRIANGLE = ParamTropicalCurve(
    [(0, 0), (1, 0), (0, 1)],
    [(0, 1, (2, 0)), (1, 2, (-2, 2)), (2, 0, (0, -2))],
    [(0, (-2, -2)), (1, (4, -2)), (2, (-2, 4))],
)
# two vertices; the end (1,0) of one crosses the end (0,1) of the other at (1,0)
CROSSING = ParamTropicalCurve(
    [(0, 0), (1, -1)],
    [(0, 1, (1, -1))],
    [(0, (1, 0)), (0, (-2, 1)), (1, (0, 1)), (1, (1, -2))],
)


def test_balancing_examples():
    assert check_balancing(single_vertex_curve(TRI2)).ok
    bad = check_balancing(single_vertex_curve([(-2, 0), (0, -2), (2, 0)]))
    assert not bad.ok and bad.vertex == 0
    assert not check_balancing(ParamTropicalCurve([])).ok


def test_edge_geometry_checked():
    wrong = ParamTropicalCurve([(0, 0), (1, 0)], [(0, 1, (0, 1))], [(0, (0, -1)), (1, (0, 1))])
    assert not check_balancing(wrong).ok


def test_genus_and_simplicity_examples():
    assert genus_and_simplicity(single_vertex_curve(TRI2)) == (0, True)
    assert genus_and_simplicity(TRIANGLE) == (1, True)
    four = single_vertex_curve([(-1, 0), (0, -1), (1, 0), (0, 1)])
    assert genus_and_simplicity(four)[1] is False
    assert genus_and_simplicity(CROSSING) == (0, True)


def test_parity_examples(quartic_curve):
    assert curve_parity(quartic_curve) == (0, 1)
    assert curve_parity(EVEN_TRIANGLE) == NO_ODD_EDGES
    assert curve_parity(TRIANGLE) == MIXED


def test_parity_less_curves_are_rejected():
    with pytest.raises(NoParity):
        classify_cells(TRIANGLE)
    with pytest.raises(NoParity):
        classify_cells(EVEN_TRIANGLE)


def test_subdivision_examples(quartic_curve):
    sub = dual_subdivision(single_vertex_curve(TRI2))
    assert list(sub.triangles.values())[0].polygon == LatticePolygon(((0, 0), (2, 0), (0, 2)))
    cross = dual_subdivision(CROSSING)
    assert len(cross.parallelograms) == 1
    assert cross.parallelograms[0].point == (1, 0)
    q = dual_subdivision(quartic_curve)
    assert q.polygon == LatticePolygon(((0, 0), (4, 0), (0, 4)))
    assert q.total_doubled_area() == 16 == validate_degree(QUARTIC).doubled_area


def test_subdivision_rejects_non_simple():
    four = single_vertex_curve([(-1, 0), (0, -1), (1, 0), (0, 1)])
    with pytest.raises(NotSimple):
        dual_subdivision(four)


def test_decomposition_examples(quartic_curve):
    dec = decompose_cycle_and_trees(TRIANGLE)
    assert len(dec.cycle_edges) == 3
    assert all(len(t.ends) == 1 and not t.edges for t in dec.trees.values())
    with pytest.raises(NotElliptic):
        decompose_cycle_and_trees(single_vertex_curve(TRI2))
    qd = decompose_cycle_and_trees(quartic_curve)
    assert all(quartic_curve.edges[i].weight % 2 == 1 for i, _ in qd.cycle_edges)
    assert {parity_of(primitive(quartic_curve.edges[i].vector)) for i, _ in qd.cycle_edges} == {(0, 1)}


def test_quartic_classification(quartic_curve):
    cls = classify_cells(quartic_curve)
    mobile = cls.of_kind("odd", mobile=True)
    nonmobile = cls.of_kind("odd", mobile=False)
    assert len(mobile) == 2 and len(nonmobile) == 4 and not cls.of_kind("even")
    for v in mobile:
        ends = cls.decomposition.trees[v].ends
        assert all(parity_of(primitive(quartic_curve.ends[j].vector)) == (0, 1) for j in ends)
    for v in nonmobile:
        ends = cls.decomposition.trees[v].ends
        assert any(parity_of(primitive(quartic_curve.ends[j].vector)) != (0, 1) for j in ends)


def _curve_checks(T, parity, degree):
    assert check_balancing(T).ok
    assert genus_and_simplicity(T) == (1, True)
    assert curve_parity(T) == parity
    cls = classify_cells(T, parity=parity)
    sub = cls.subdivision
    assert sub.total_doubled_area() == validate_degree(degree).doubled_area
    assert sub.polygon == validate_degree(degree).newton
    # the segment dual to each edge or end has lattice length equal to its weight
    for cell in sub.triangles.values():
        for (kind, i), (a, b) in cell.segments.items():
            piece = T.edges[i] if kind == "edge" else T.ends[i]
            assert lattice_length(b - a) == piece.weight
    for p in sub.parallelograms:
        assert p.doubled_area % 2 == 0
    dec = cls.decomposition
    cyc = dec.cycle_edge_set()
    assert all(e.weight % 2 == 0 for i, e in enumerate(T.edges) if i not in cyc)
    for c in cls.triangles.values():
        even = all(lattice_length(e) % 2 == 0 for e in c.polygon.edges())
        assert (c.kind == "even") == even
    return cls


def _overlap(p, q):
    """Interiors of two convex polygons meet iff no edge of either separates them."""
    for poly, other in ((p, q), (q, p)):
        vs = poly.vertices
        for i in range(len(vs)):
            a, b = vs[i], vs[(i + 1) % len(vs)]
            if all((b.x - a.x) * (w.y - a.y) - (b.y - a.y) * (w.x - a.x) <= 0 for w in other.vertices):
                return False
    return True


def test_enumerated_curves_satisfy_curve_invariants(oracle_families):
    from conftest import blown_up
    degrees = {"quartic": QUARTIC, "m2": blown_up(2), "m3": blown_up(3)}
    for name, curves in oracle_families.items():
        assert curves
        for T in curves:
            cls = _curve_checks(T, (0, 1), degrees[name])
            cells = cls.subdivision.cells()
            assert not any(_overlap(p, q) for p, q in combinations(cells, 2))


def test_json_round_trip(quartic_curve):
    text = json.dumps(curve_to_json(quartic_curve), sort_keys=True)
    back = curve_from_json(json.loads(text))
    assert back.canonical_key() == quartic_curve.canonical_key()
    assert json.dumps(curve_to_json(back), sort_keys=True) == text
