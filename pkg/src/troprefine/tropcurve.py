"""Parameterized plane tropical curves with exact rational geometry.

A curve is a finite graph: vertices carry rational positions, bounded edges
carry an integer vector pointing from their first to their second endpoint
(weight = lattice length), and ends carry their outgoing degree vector.

The dual subdivision is computed from the tropical polynomial picture: the
lattice point dual to a complementary region is the gradient of the
max-convention polynomial there, obtained by walking a ray to infinity and
subtracting one jump per crossed edge.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .errors import NotElliptic, NotSimple, ParseError
from .lattice import (
    LatticePolygon,
    LatticeVector,
    dot,
    lattice_length,
    newton_polygon,
    parity_of,
    primitive,
    angle_key,
    rot_ccw,
    vec,
    wedge,
)

Point = tuple  # (Fraction, Fraction)

NO_ODD_EDGES = "NoOddEdges"
MIXED = "Mixed"


def point(x, y=None) -> tuple[Fraction, Fraction]:
    if y is None:
        x, y = x
    return (Fraction(x), Fraction(y))


def _pw(a, b) -> Fraction:
    return a[0] * b[1] - a[1] * b[0]


def _psub(a, b):
    return (a[0] - b[0], a[1] - b[1])


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    vector: LatticeVector  # weighted, points from u to v

    @property
    def weight(self) -> int:
        return lattice_length(self.vector)

    @property
    def primitive_direction(self) -> LatticeVector:
        return primitive(self.vector)


@dataclass(frozen=True)
class End:
    vertex: int
    vector: LatticeVector  # outgoing degree vector
    label: Any = None

    @property
    def weight(self) -> int:
        return lattice_length(self.vector)


@dataclass
class ParamTropicalCurve:
    positions: list
    edges: list[Edge] = field(default_factory=list)
    ends: list[End] = field(default_factory=list)
    marked_point: tuple | None = None  # (("edge"|"end", index), position)

    def __post_init__(self):
        self.positions = [point(p) for p in self.positions]
        self.edges = [e if isinstance(e, Edge) else Edge(e[0], e[1], vec(e[2])) for e in self.edges]
        self.ends = [t if isinstance(t, End) else End(t[0], vec(t[1]), *t[2:]) for t in self.ends]
        self._cache: dict = {}

    @property
    def n_vertices(self) -> int:
        return len(self.positions)

    def degree(self) -> list[LatticeVector]:
        return [t.vector for t in self.ends]

    def outgoing(self, v: int) -> list[tuple[str, int, LatticeVector]]:
        """Outgoing weighted vectors at ``v`` as (kind, index, vector)."""
        out = []
        for i, e in enumerate(self.edges):
            if e.u == v:
                out.append(("edge", i, e.vector))
            if e.v == v:
                out.append(("edge", i, -e.vector))
        for j, t in enumerate(self.ends):
            if t.vertex == v:
                out.append(("end", j, t.vector))
        return out

    def valence(self, v: int) -> int:
        return len(self.outgoing(v))

    def elements(self):
        """Image pieces: (key, start point, direction, is_ray, weighted vector)."""
        items = []
        for i, e in enumerate(self.edges):
            p, q = self.positions[e.u], self.positions[e.v]
            items.append((("edge", i), p, _psub(q, p), False, e.vector))
        for j, t in enumerate(self.ends):
            items.append((("end", j), self.positions[t.vertex], t.vector, True, t.vector))
        return items

    def element_vertices(self, key) -> tuple[int, ...]:
        kind, i = key
        if kind == "edge":
            return (self.edges[i].u, self.edges[i].v)
        return (self.ends[i].vertex,)

    def canonical_key(self) -> tuple:
        """Hashable description of the image with labels, independent of indexing."""
        edges = frozenset(
            frozenset([(self.positions[e.u], tuple(e.vector)), (self.positions[e.v], tuple(-e.vector))])
            for e in self.edges)
        ends = frozenset((self.positions[t.vertex], tuple(t.vector), t.label) for t in self.ends)
        return (frozenset(self.positions), edges, ends)


# ---------------------------------------------------------------- balancing

@dataclass
class BalanceReport:
    ok: bool
    vertex: int | None = None
    message: str = ""

    def __bool__(self):
        return self.ok


def check_balancing(T: ParamTropicalCurve) -> BalanceReport:
    if T.n_vertices == 0:
        return BalanceReport(False, None, "curve has no vertex")
    for v in range(T.n_vertices):
        s = LatticeVector(0, 0)
        for _, _, w in T.outgoing(v):
            s = s + w
        if s != (0, 0):
            return BalanceReport(False, v, f"outgoing vectors at vertex {v} sum to {tuple(s)}")
    for i, e in enumerate(T.edges):
        d = _psub(T.positions[e.v], T.positions[e.u])
        if _pw(d, e.vector) != 0 or dot(d, e.vector) <= 0:
            return BalanceReport(False, e.u, f"edge {i} geometry does not match its direction")
    return BalanceReport(True)


# ---------------------------------------------------------- topology, genus

def is_connected(T: ParamTropicalCurve) -> bool:
    if T.n_vertices == 0:
        return False
    adj = defaultdict(list)
    for e in T.edges:
        adj[e.u].append(e.v)
        adj[e.v].append(e.u)
    seen = {0}
    stack = [0]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == T.n_vertices


def genus(T: ParamTropicalCurve) -> int:
    return len(T.edges) - T.n_vertices + 1


def _intersect(a, b):
    """Intersection of two image pieces.

    Returns None, ("point", P, s, t) with parameters along each piece, or
    ("overlap",).
    """
    _, p1, d1, ray1, _ = a
    _, p2, d2, ray2, _ = b
    den = _pw(d1, d2)
    r = _psub(p2, p1)
    if den == 0:
        if _pw(r, d1) != 0:
            return None
        # collinear: project onto d1 and compare parameter intervals
        dd = dot(d1, d1)
        s0 = Fraction(dot(r, d1)) / dd
        s1 = Fraction(dot(_psub((p2[0] + d2[0], p2[1] + d2[1]), p1), d1)) / dd
        lo1, hi1 = 0, (None if ray1 else 1)
        if ray2:
            lo2, hi2 = (s0, None) if s1 > s0 else (None, s0)
        else:
            lo2, hi2 = min(s0, s1), max(s0, s1)
        lo = max(x for x in (lo1, lo2) if x is not None)
        his = [x for x in (hi1, hi2) if x is not None]
        hi = min(his) if his else None
        if hi is None or lo < hi:
            return ("overlap",)
        if lo == hi:
            q = (p1[0] + lo * d1[0], p1[1] + lo * d1[1])
            return ("point", q, None, None)
        return None
    s = _pw(r, d2) / den
    t = _pw(r, d1) / den
    if s < 0 or t < 0 or (not ray1 and s > 1) or (not ray2 and t > 1):
        return None
    q = (p1[0] + s * d1[0], p1[1] + s * d1[1])
    return ("point", q, s, t)


@dataclass
class SimplicityReport:
    simple: bool
    reason: str = ""
    double_points: list = field(default_factory=list)  # (point, key_a, key_b)


def analyse_image(T: ParamTropicalCurve) -> SimplicityReport:
    if "image" in T._cache:
        return T._cache["image"]
    rep = _analyse_image(T)
    T._cache["image"] = rep
    return rep


def _analyse_image(T: ParamTropicalCurve) -> SimplicityReport:
    for v in range(T.n_vertices):
        out = T.outgoing(v)
        if len(out) != 3:
            return SimplicityReport(False, f"vertex {v} has valence {len(out)}")
        vs = [w for _, _, w in out]
        for i in range(3):
            for j in range(i + 1, 3):
                if wedge(vs[i], vs[j]) == 0:
                    return SimplicityReport(False, f"vertex {v} is degenerate")
    if len(set(T.positions)) != T.n_vertices:
        return SimplicityReport(False, "two vertices share an image point")
    els = T.elements()
    vpos = {p: v for v, p in enumerate(T.positions)}
    crossings = []
    for i in range(len(els)):
        for j in range(i + 1, len(els)):
            a, b = els[i], els[j]
            shared = set(T.element_vertices(a[0])) & set(T.element_vertices(b[0]))
            hit = _intersect(a, b)
            if hit is None:
                continue
            if hit[0] == "overlap":
                return SimplicityReport(False, f"pieces {a[0]} and {b[0]} overlap")
            q = hit[1]
            if q in vpos:
                v = vpos[q]
                if v in shared and q == T.positions[v]:
                    continue
                return SimplicityReport(False, f"vertex {v} lies on piece {a[0] if v not in T.element_vertices(a[0]) else b[0]}")
            if shared:
                # adjacent pieces meeting away from their common vertex
                return SimplicityReport(False, f"adjacent pieces {a[0]} and {b[0]} meet twice")
            crossings.append((q, a[0], b[0]))
    seen = defaultdict(int)
    for q, _, _ in crossings:
        seen[q] += 1
    if any(c > 1 for c in seen.values()):
        return SimplicityReport(False, "an image point has three or more preimages")
    crossings.sort(key=lambda c: c[0])
    return SimplicityReport(True, "", crossings)


def genus_and_simplicity(T: ParamTropicalCurve) -> tuple[int, bool]:
    g = genus(T) if is_connected(T) else -1
    return g, analyse_image(T).simple


def double_points(T: ParamTropicalCurve) -> list:
    rep = analyse_image(T)
    if not rep.simple:
        raise NotSimple(rep.reason)
    return rep.double_points


# ------------------------------------------------------------------ parity

def curve_parity(T: ParamTropicalCurve):
    pars = set()
    for e in list(T.edges) + list(T.ends):
        if e.weight % 2 == 1:
            pars.add(parity_of(primitive(e.vector)))
    if not pars:
        return NO_ODD_EDGES
    if len(pars) > 1:
        return MIXED
    return pars.pop()


# ------------------------------------------------------- dual subdivision

_DIRECTION_STEPS = [(1, 1), (1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2), (1, 4), (4, 1),
                    (3, 4), (4, 3), (1, 5), (5, 1), (2, 5), (5, 2), (1, 7), (7, 1)]


class _GradientField:
    def __init__(self, T: ParamTropicalCurve, poly: LatticePolygon):
        self.T = T
        self.poly = poly
        self.els = T.elements()
        self.vpos = set(T.positions)
        self.dirs = [e[4] for e in self.els]

    def far_vertex(self, d):
        best = max(self.poly.vertices, key=lambda p: dot(p, d))
        if sum(1 for p in self.poly.vertices if dot(p, d) == dot(best, d)) != 1:
            return None
        return best

    def gradient(self, x, d):
        """Gradient in the region entered by the ray x + t*d for tiny t > 0.

        Returns None when the ray is not generic (hits a vertex, runs along
        a piece, or is orthogonal to a side of the Newton polygon).
        """
        if any(_pw(d, w) == 0 for w in self.dirs):
            return None
        far = self.far_vertex(d)
        if far is None:
            return None
        g = far
        for key, p, dd, ray, w in self.els:
            den = _pw(d, dd)
            r = _psub(p, x)
            t = _pw(r, dd) / den
            s = _pw(r, d) / den
            if t < 0:
                continue
            if (s == 0) or (not ray and s == 1):
                if t > 0:
                    return None  # ray passes through a vertex
                continue
            if s < 0 or (not ray and s > 1):
                continue
            if t == 0:
                continue  # piece through the start point
            n = rot_ccw(w)
            if dot(n, d) < 0:
                n = -n
            g = g - n
        return g

    def sector_gradient(self, x, u1, u2):
        """Gradient in the open sector swept counter-clockwise from u1 to u2."""
        p1, p2 = primitive(u1), primitive(u2)
        for k, j in _DIRECTION_STEPS:
            d = p1 * k + p2 * j
            if wedge(p1, d) <= 0 or wedge(d, p2) <= 0:
                continue
            g = self.gradient(x, d)
            if g is not None:
                return g
        raise NotSimple("no generic ray found inside a sector")


@dataclass
class TriangleCell:
    vertex: int
    polygon: LatticePolygon
    # dual segment for each outgoing slot: (kind, index) -> (gradient, gradient)
    segments: dict

    @property
    def doubled_area(self) -> int:
        return self.polygon.doubled_area


@dataclass
class ParallelogramCell:
    point: tuple
    pieces: tuple
    polygon: LatticePolygon

    @property
    def doubled_area(self) -> int:
        return self.polygon.doubled_area

    def side_lengths(self) -> list[int]:
        return [lattice_length(e) for e in self.polygon.edges()]


@dataclass
class DualSubdivision:
    polygon: LatticePolygon
    triangles: dict[int, TriangleCell]
    parallelograms: list[ParallelogramCell]

    def cells(self):
        return [c.polygon for c in self.triangles.values()] + [c.polygon for c in self.parallelograms]

    def total_doubled_area(self) -> int:
        return sum(c.doubled_area for c in self.cells())


def dual_subdivision(T: ParamTropicalCurve) -> DualSubdivision:
    if "dual" in T._cache:
        return T._cache["dual"]
    rep = analyse_image(T)
    if not rep.simple:
        raise NotSimple(rep.reason)
    poly = newton_polygon(T.degree())
    field_ = _GradientField(T, poly)
    triangles = {}
    for v in range(T.n_vertices):
        out = sorted(T.outgoing(v), key=lambda o: _angle_sort_key(o[2]))
        x = T.positions[v]
        grads = []
        for i in range(3):
            grads.append(field_.sector_gradient(x, out[i][2], out[(i + 1) % 3][2]))
        segs = {}
        for i in range(3):
            # slot i separates the sectors (i-1, i) and (i, i+1)
            a, b = grads[i - 1], grads[i]
            if b - a != rot_ccw(out[i][2]) and a - b != rot_ccw(out[i][2]):
                raise NotSimple(f"dual segment at vertex {v} inconsistent with its edge")
            segs[(out[i][0], out[i][1])] = (a, b)
        triangles[v] = TriangleCell(v, LatticePolygon.hull(grads), segs)
    paras = []
    for q, ka, kb in rep.double_points:
        wa = _piece_vector(T, ka)
        wb = _piece_vector(T, kb)
        rays = sorted([wa, -wa, wb, -wb], key=_angle_sort_key)
        grads = [field_.sector_gradient(q, rays[i], rays[(i + 1) % 4]) for i in range(4)]
        paras.append(ParallelogramCell(q, (ka, kb), LatticePolygon.hull(grads)))
    sub = DualSubdivision(poly, triangles, paras)
    if sub.total_doubled_area() != poly.doubled_area:
        raise NotSimple("cells do not tile the Newton polygon")
    T._cache["dual"] = sub
    return sub


def _piece_vector(T, key):
    kind, i = key
    return T.edges[i].vector if kind == "edge" else T.ends[i].vector


def _angle_sort_key(w):
    return angle_key(w)


# ------------------------------------------------------- cycle and trees

@dataclass
class Tree:
    root: int
    vertices: list[int]
    edges: list[int]
    ends: list[int]
    root_slot: tuple  # (kind, index) of the tree piece leaving the cycle vertex


@dataclass
class CycleDecomposition:
    cycle_vertices: list[int]
    # cycle_edges[i] joins cycle_vertices[i] to cycle_vertices[i+1];
    # forward is True when the stored edge vector points that way
    cycle_edges: list[tuple[int, bool]]
    trees: dict[int, Tree]

    def cycle_edge_set(self) -> set[int]:
        return {i for i, _ in self.cycle_edges}

    def vertex_of_tree(self) -> dict[int, int]:
        owner = {}
        for root, tr in self.trees.items():
            for v in tr.vertices:
                owner[v] = root
        return owner


def decompose_cycle_and_trees(T: ParamTropicalCurve) -> CycleDecomposition:
    if "decomp" in T._cache:
        return T._cache["decomp"]
    if not is_connected(T) or genus(T) != 1:
        raise NotElliptic("curve is not of genus one")
    deg = defaultdict(int)
    inc = defaultdict(list)
    for i, e in enumerate(T.edges):
        deg[e.u] += 1
        deg[e.v] += 1
        inc[e.u].append(i)
        inc[e.v].append(i)
    alive = set(range(T.n_vertices))
    live_edges = set(range(len(T.edges)))
    stack = [v for v in alive if deg[v] <= 1]
    while stack:
        v = stack.pop()
        if v not in alive:
            continue
        alive.discard(v)
        for i in inc[v]:
            if i in live_edges:
                live_edges.discard(i)
                e = T.edges[i]
                w = e.v if e.u == v else e.u
                deg[w] -= 1
                if deg[w] <= 1 and w in alive:
                    stack.append(w)
    start = min(alive)
    order = [start]
    cedges = []
    prev_edge = None
    cur = start
    while True:
        nxt = [i for i in inc[cur] if i in live_edges and i != prev_edge]
        i = nxt[0]
        e = T.edges[i]
        forward = e.u == cur
        other = e.v if forward else e.u
        cedges.append((i, forward))
        prev_edge = i
        if other == start:
            break
        order.append(other)
        cur = other
    cset = {i for i, _ in cedges}
    trees = {}
    for v in order:
        slots = [(k, i) for k, i, _ in T.outgoing(v) if not (k == "edge" and i in cset)]
        (slot,) = slots
        verts, edges, ends = [v], [], []
        if slot[0] == "end":
            ends.append(slot[1])
        else:
            edges.append(slot[1])
            e = T.edges[slot[1]]
            frontier = [(e.v if e.u == v else e.u, slot[1])]
            while frontier:
                x, via = frontier.pop()
                verts.append(x)
                for k, j, _ in T.outgoing(x):
                    if k == "end":
                        ends.append(j)
                    elif j != via:
                        edges.append(j)
                        f = T.edges[j]
                        frontier.append((f.v if f.u == x else f.u, j))
        trees[v] = Tree(v, verts, edges, ends, slot)
    dec = CycleDecomposition(order, cedges, trees)
    T._cache["decomp"] = dec
    return dec


# --------------------------------------------------- cell classification

@dataclass
class TriangleClass:
    vertex: int
    kind: str  # "even" | "odd"
    mobile: bool | None
    theta: tuple[int, int]
    polygon: LatticePolygon
    on_cycle: bool

    @property
    def doubled_area(self) -> int:
        return self.polygon.doubled_area


@dataclass
class Classification:
    parity: tuple[int, int]
    triangles: dict[int, TriangleClass]
    parallelograms: list[ParallelogramCell]
    decomposition: CycleDecomposition
    subdivision: DualSubdivision

    def of_kind(self, kind: str, mobile: bool | None = None) -> list[int]:
        return [v for v, c in self.triangles.items()
                if c.kind == kind and (mobile is None or c.mobile == mobile)]


def _theta(poly: LatticePolygon, kind: str) -> tuple[int, int]:
    vs = poly.vertices
    if kind == "even":
        pars = {parity_of(p) for p in vs}
        if len(pars) != 1:
            raise NotSimple("even triangle with vertices of different parity")
        return pars.pop()
    evens = [(vs[i], vs[(i + 1) % 3]) for i in range(3)
             if lattice_length(vs[(i + 1) % 3] - vs[i]) % 2 == 0]
    if len(evens) != 1:
        raise NotSimple("odd triangle without a unique even side")
    a, b = evens[0]
    if parity_of(a) != parity_of(b):
        raise NotSimple("endpoints of an even side differ in parity")
    return parity_of(a)


def classify_cells(T: ParamTropicalCurve, decomposition: CycleDecomposition | None = None,
                   parity: tuple[int, int] | None = None) -> Classification:
    from .errors import NoParity

    dec = decomposition or decompose_cycle_and_trees(T)
    par = curve_parity(T)
    if par in (NO_ODD_EDGES, MIXED):
        raise NoParity(f"curve has no parity ({par})")
    if parity is not None and tuple(parity) != par:
        raise NoParity(f"curve parity {par} differs from requested {tuple(parity)}")
    cset = dec.cycle_edge_set()
    for i, e in enumerate(T.edges):
        odd = e.weight % 2 == 1
        if odd != (i in cset):
            raise NoParity("odd edges are not exactly the cycle edges")
    if any(t.weight % 2 for t in T.ends):
        raise NoParity("an end has odd weight")
    sub = dual_subdivision(T)
    cyc = set(dec.cycle_vertices)
    out = {}
    for v, cell in sub.triangles.items():
        sides_even = all(lattice_length(e) % 2 == 0 for e in cell.polygon.edges())
        kind = "even" if sides_even else "odd"
        mobile = None
        if kind == "odd":
            tree = dec.trees[v]
            mobile = all(parity_of(primitive(T.ends[j].vector)) == par for j in tree.ends)
        out[v] = TriangleClass(v, kind, mobile, _theta(cell.polygon, kind), cell.polygon, v in cyc)
    return Classification(par, out, sub.parallelograms, dec, sub)


# ------------------------------------------------------------ JSON schema

def _frac_text(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _frac_parse(s) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {s!r}") from exc


def curve_to_json(T: ParamTropicalCurve) -> dict:
    out = {
        "vertices": [{"position": [_frac_text(p[0]), _frac_text(p[1])]} for p in T.positions],
        "edges": [{"endpoints": [e.u, e.v], "weight": e.weight,
                   "direction": list(e.primitive_direction)} for e in T.edges],
        "ends": [{"vertex": t.vertex, "vector": list(t.vector),
                  **({"label": t.label} if t.label is not None else {})} for t in T.ends],
    }
    if T.marked_point is not None:
        (kind, idx), pos = T.marked_point
        out["marked_point"] = {kind: idx, "position": [_frac_text(pos[0]), _frac_text(pos[1])]}
    return out


def _freeze(x):
    return tuple(_freeze(y) for y in x) if isinstance(x, list) else x


def curve_from_json(obj: dict) -> ParamTropicalCurve:
    try:
        pos = [(_frac_parse(v["position"][0]), _frac_parse(v["position"][1])) for v in obj["vertices"]]
        edges = []
        for e in obj["edges"]:
            w = int(e["weight"])
            d = vec(e["direction"])
            if w <= 0 or d == (0, 0) or lattice_length(d) != 1:
                raise ParseError("edge needs a positive weight and a primitive direction")
            edges.append(Edge(int(e["endpoints"][0]), int(e["endpoints"][1]), d * w))
        ends = []
        for t in obj["ends"]:
            v = vec(t["vector"])
            if v == (0, 0):
                raise ParseError("zero end vector")
            ends.append(End(int(t["vertex"]), v, _freeze(t.get("label"))))
        marked = None
        if "marked_point" in obj:
            m = obj["marked_point"]
            kind = "edge" if "edge" in m else "end"
            marked = ((kind, int(m[kind])), (_frac_parse(m["position"][0]), _frac_parse(m["position"][1])))
    except (KeyError, TypeError, IndexError) as exc:
        raise ParseError(f"bad curve payload: {exc!r}") from exc
    n = len(pos)
    if any(not (0 <= e.u < n and 0 <= e.v < n) for e in edges) or any(not 0 <= t.vertex < n for t in ends):
        raise ParseError("edge or end refers to a missing vertex")
    return ParamTropicalCurve(pos, edges, ends, marked)


def single_vertex_curve(vectors: Iterable[Sequence[int]], at=(0, 0)) -> ParamTropicalCurve:
    return ParamTropicalCurve([point(at)], [], [End(0, vec(v), i) for i, v in enumerate(vectors)])
