"""Orientation kits of simple elliptic curves with a parity.

A kit fixes a traversal direction of the cycle and an orientation (+1 for
counter-clockwise) of every triangle of the dual subdivision.  Triangles of
non-mobile odd vertices are forced by the traversal; the others are free.

Two independent routes are provided for the sign of a kit (the long
parity-count formula and the count of negative vertices) and for the
refined multiplicity (sum over kits and the factorised closed form).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import InternalInconsistency
from .lattice import interior_points_with_parity, validate_degree, wedge
from .laurent import ONE, ZERO, LaurentPoly, area_factor, monomial
from .tropcurve import Classification, ParamTropicalCurve, classify_cells


@dataclass(frozen=True)
class OrientationKit:
    cycle_orientation: int
    orientations: tuple  # sorted (vertex, +1/-1) pairs

    def orientation(self, v: int) -> int:
        return dict(self.orientations)[v]

    def as_dict(self) -> dict[int, int]:
        return dict(self.orientations)


@dataclass
class KitStatistics:
    kappa_doubled: int
    s_terms: dict = field(default_factory=dict)
    s_total: int = 0
    negative_vertices: int = 0
    A_T_doubled: int = 0
    n_nonmobile_negative: int = 0

    @property
    def sign_formula(self) -> int:
        return -1 if self.s_total % 2 else 1

    @property
    def sign_vertexcount(self) -> int:
        return -1 if self.negative_vertices % 2 else 1


def content(weight: int) -> int:
    """Integer part of (weight - 1) / 2."""
    return (weight - 1) // 2


def induced_orientation(T: ParamTropicalCurve, cls: Classification, v: int, cycle_orientation: int) -> int:
    """Orientation of the triangle at cycle vertex ``v`` induced by a traversal.

    The local cyclic order is (incoming cycle edge, tree edge, outgoing cycle
    edge), each taken as a vector leaving ``v``.
    """
    dec = cls.decomposition
    i = dec.cycle_vertices.index(v)
    m = len(dec.cycle_vertices)
    # edge i runs from vertex i to i+1; edge i-1 from i-1 to i
    back_idx, back_fwd = dec.cycle_edges[i - 1]
    fwd_idx, fwd_fwd = dec.cycle_edges[i % m]
    to_prev = -T.edges[back_idx].vector if back_fwd else T.edges[back_idx].vector
    to_next = T.edges[fwd_idx].vector if fwd_fwd else -T.edges[fwd_idx].vector
    incoming = to_prev if cycle_orientation > 0 else to_next
    kind, j = dec.trees[v].root_slot
    tree_vec = T.ends[j].vector if kind == "end" else _leaving(T, j, v)
    w = wedge(incoming, tree_vec)
    if w == 0:
        raise InternalInconsistency(f"degenerate cycle vertex {v}")
    return 1 if w > 0 else -1


def _leaving(T, edge_index, v):
    e = T.edges[edge_index]
    return e.vector if e.u == v else -e.vector


def _forced(T, cls, cycle_orientation):
    return {v: induced_orientation(T, cls, v, cycle_orientation)
            for v in cls.of_kind("odd", mobile=False)}


def enumerate_kits(T: ParamTropicalCurve, cls: Classification | None = None) -> list[OrientationKit]:
    cls = cls or classify_cells(T)
    free = sorted(cls.of_kind("even") + cls.of_kind("odd", mobile=True))
    kits = []
    for o in (1, -1):
        forced = _forced(T, cls, o)
        for bits in itertools.product((1, -1), repeat=len(free)):
            orient = dict(forced)
            orient.update(zip(free, bits))
            kits.append(OrientationKit(o, tuple(sorted(orient.items()))))
    return kits


def quantum_index_doubled(cls: Classification, kit: OrientationKit) -> int:
    """2*kappa: signed doubled triangle areas (parallelograms excluded)."""
    orient = kit.as_dict()
    return sum(orient[v] * c.doubled_area for v, c in cls.triangles.items())


def kit_statistics(T: ParamTropicalCurve, cls: Classification, kit: OrientationKit,
                   half_interior: int | None = None) -> KitStatistics:
    alpha, beta = cls.parity
    orient = kit.as_dict()
    if half_interior is None:
        half_interior = validate_degree(T.degree()).half_interior_count
    area_doubled = cls.subdivision.polygon.doubled_area
    kappa_d = quantum_index_doubled(cls, kit)
    if (area_doubled - kappa_d) % 8:
        raise InternalInconsistency("area minus quantum index is not divisible by 4")

    def harnack(v):
        c = cls.triangles[v]
        return interior_points_with_parity(c.polygon, c.theta)

    def twisted(v):
        c = cls.triangles[v]
        return interior_points_with_parity(c.polygon, (c.theta[0] + beta, c.theta[1] + alpha))

    mobile = cls.of_kind("odd", mobile=True)
    nonmobile = cls.of_kind("odd", mobile=False)
    evens = cls.of_kind("even")
    compatible = {v: orient[v] == induced_orientation(T, cls, v, kit.cycle_orientation) for v in mobile}
    owner = cls.decomposition.vertex_of_tree()
    even_ncom = {v for v in evens if owner.get(v) in compatible and not compatible[owner[v]]}

    terms = {
        "half_interior": half_interior,
        "area_gap": (area_doubled - kappa_d) // 8,
        "pi": sum(1 for p in cls.parallelograms if all(s % 2 for s in p.side_lengths())),
        "zeta_even_com": sum(harnack(v) for v in evens if v not in even_ncom),
        "zeta_even_ncom": sum(twisted(v) for v in evens if v in even_ncom),
        "zeta_odd_nmob": sum(harnack(v) for v in nonmobile),
        "zeta_odd_com": sum(harnack(v) for v in mobile if compatible[v]),
        "zeta_odd_ncom": sum(twisted(v) for v in mobile if not compatible[v]),
        "tau_bound": sum(content(e.weight) for e in T.edges if orient[e.u] == orient[e.v]),
        "tau_ends": sum(content(t.weight) for t in T.ends if orient[t.vertex] < 0),
    }
    stats = KitStatistics(
        kappa_doubled=kappa_d,
        s_terms=terms,
        s_total=sum(terms.values()),
        negative_vertices=sum(1 for s in orient.values() if s < 0),
        A_T_doubled=sum(orient[v] * cls.triangles[v].doubled_area for v in nonmobile),
        n_nonmobile_negative=sum(1 for v in nonmobile if orient[v] < 0),
    )
    return stats


def welschinger_sign(T: ParamTropicalCurve, cls: Classification, kit: OrientationKit,
                     half_interior: int | None = None) -> tuple[int, int]:
    st = kit_statistics(T, cls, kit, half_interior)
    return st.sign_formula, st.sign_vertexcount


def refined_multiplicity_sum(T: ParamTropicalCurve, cls: Classification | None = None,
                             check: bool = True) -> LaurentPoly:
    cls = cls or classify_cells(T)
    half = validate_degree(T.degree()).half_interior_count
    total: dict[int, int] = {}
    for kit in enumerate_kits(T, cls):
        st = kit_statistics(T, cls, kit, half)
        if check and st.sign_formula != st.sign_vertexcount:
            raise InternalInconsistency(
                f"sign formula {st.sign_formula} disagrees with negative-vertex sign "
                f"{st.sign_vertexcount} (terms {st.s_terms})")
        total[st.kappa_doubled] = total.get(st.kappa_doubled, 0) + st.sign_vertexcount
    return LaurentPoly(total)


def refined_multiplicity_closed(T: ParamTropicalCurve, cls: Classification | None = None) -> LaurentPoly:
    cls = cls or classify_cells(T)
    first = ZERO
    for o in (1, -1):
        forced = _forced(T, cls, o)
        n_neg = sum(1 for s in forced.values() if s < 0)
        a_t = sum(s * cls.triangles[v].doubled_area for v, s in forced.items())
        first = first + monomial(-1 if n_neg % 2 else 1, a_t)
    prod = ONE
    for v in cls.of_kind("even") + cls.of_kind("odd", mobile=True):
        prod = prod * area_factor(cls.triangles[v].doubled_area)
    return first * prod


def rational_multiplicity(T: ParamTropicalCurve) -> LaurentPoly:
    """Product of q^A - q^-A over the triangles of a simple rational curve."""
    from .tropcurve import dual_subdivision

    prod = ONE
    for cell in dual_subdivision(T).triangles.values():
        prod = prod * area_factor(cell.doubled_area)
    return prod


def rational_multiplicity_from_vertices(T: ParamTropicalCurve) -> LaurentPoly:
    """Same product, with triangle areas read off the vertex vectors."""
    prod = ONE
    for v in range(T.n_vertices):
        out = [w for _, _, w in T.outgoing(v)]
        prod = prod * area_factor(abs(wedge(out[0], out[1])))
    return prod


def congruence_violations(poly: LaurentPoly, doubled_area: int) -> list[int]:
    """Half exponents h of ``poly`` (term q^(h/2)) breaking the elliptic congruences.

    With kappa = h/2 and area A = doubled_area/2 each term needs kappa even
    and kappa congruent to A mod 4.
    """
    return sorted(h for h, _ in poly.items() if h % 4 or (h - doubled_area) % 8)
