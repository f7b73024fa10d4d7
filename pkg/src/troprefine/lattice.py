"""Integer lattice primitives and convex lattice polygons.

Everything here is exact integer arithmetic. Areas are kept doubled so
they stay integral.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, cmp_to_key
from typing import Iterable, NamedTuple, Sequence

from .errors import Degenerate, InvalidVector, NotBalanced, NotEven


class LatticeVector(NamedTuple):
    x: int
    y: int

    def __add__(self, other):  # type: ignore[override]
        return LatticeVector(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return LatticeVector(self.x - other[0], self.y - other[1])

    def __neg__(self):
        return LatticeVector(-self.x, -self.y)

    def __mul__(self, k):  # type: ignore[override]
        return LatticeVector(self.x * k, self.y * k)

    __rmul__ = __mul__


def vec(v: Sequence[int]) -> LatticeVector:
    if isinstance(v, LatticeVector):
        return v
    x, y = v
    if int(x) != x or int(y) != y:
        raise InvalidVector(f"non-integer lattice vector {v!r}")
    return LatticeVector(int(x), int(y))


def wedge(a: Sequence[int], b: Sequence[int]) -> int:
    return a[0] * b[1] - a[1] * b[0]


def dot(a, b):
    return a[0] * b[0] + a[1] * b[1]


def rot_ccw(a: Sequence[int]) -> LatticeVector:
    """Rotate by a quarter turn counter-clockwise: (x, y) -> (-y, x)."""
    return LatticeVector(-a[1], a[0])


def rot_cw(a: Sequence[int]) -> LatticeVector:
    return LatticeVector(a[1], -a[0])


def lattice_length(a: Sequence[int]) -> int:
    g = math.gcd(a[0], a[1])
    if g == 0:
        raise InvalidVector("zero vector has no lattice length")
    return g


def primitive(a: Sequence[int]) -> LatticeVector:
    g = lattice_length(a)
    return LatticeVector(a[0] // g, a[1] // g)


def parity_of(p: Sequence[int]) -> tuple[int, int]:
    return (p[0] % 2, p[1] % 2)


def primitive_and_parity(a: Sequence[int]) -> tuple[LatticeVector, tuple[int, int]]:
    u = primitive(a)
    return u, parity_of(u)


def _half(a) -> int:
    return 0 if a[1] > 0 or (a[1] == 0 and a[0] > 0) else 1


def _angle_cmp(a, b) -> int:
    ha, hb = _half(a), _half(b)
    if ha != hb:
        return ha - hb
    w = wedge(a, b)
    return -1 if w > 0 else (1 if w < 0 else 0)


angle_key = cmp_to_key(_angle_cmp)
"""Exact sort key for the polar angle in [0, 2pi)."""


def sorted_by_angle(vectors: Iterable[Sequence[int]]) -> list:
    return sorted(vectors, key=angle_key)


@dataclass(frozen=True)
class LatticePolygon:
    """Strictly convex lattice polygon, vertices listed counter-clockwise."""

    vertices: tuple[LatticeVector, ...]

    def __post_init__(self):
        vs = tuple(vec(v) for v in self.vertices)
        object.__setattr__(self, "vertices", vs)
        n = len(vs)
        if n < 3:
            raise Degenerate("a polygon needs at least three vertices")
        for i in range(n):
            a, b, c = vs[i], vs[(i + 1) % n], vs[(i + 2) % n]
            if wedge(b - a, c - b) <= 0:
                raise Degenerate(f"vertices not strictly convex counter-clockwise at {b}")

    @classmethod
    def hull(cls, points: Iterable[Sequence[int]]) -> "LatticePolygon":
        """Convex hull (monotone chain), collinear points dropped."""
        pts = sorted(set(vec(p) for p in points))
        if len(pts) < 3:
            raise Degenerate("fewer than three distinct points")

        def half(seq):
            out: list[LatticeVector] = []
            for p in seq:
                while len(out) >= 2 and wedge(out[-1] - out[-2], p - out[-1]) <= 0:
                    out.pop()
                out.append(p)
            return out

        lower = half(pts)
        upper = half(reversed(pts))
        ring = lower[:-1] + upper[:-1]
        if len(ring) < 3:
            raise Degenerate("points are collinear")
        return cls(tuple(ring))

    def edges(self) -> list[LatticeVector]:
        vs = self.vertices
        return [vs[(i + 1) % len(vs)] - vs[i] for i in range(len(vs))]

    @cached_property
    def doubled_area(self) -> int:
        vs = self.vertices
        return sum(wedge(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs)))

    @cached_property
    def lattice_perimeter(self) -> int:
        return sum(lattice_length(e) for e in self.edges())

    @property
    def boundary_count(self) -> int:
        return self.lattice_perimeter

    def contains(self, p: Sequence[int], strict: bool = False) -> bool:
        vs = self.vertices
        for i in range(len(vs)):
            a, b = vs[i], vs[(i + 1) % len(vs)]
            w = wedge(b - a, (p[0] - a.x, p[1] - a.y))
            if w < 0 or (strict and w == 0):
                return False
        return True

    def bbox(self) -> tuple[int, int, int, int]:
        xs = [v.x for v in self.vertices]
        ys = [v.y for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def lattice_points(self, interior_only: bool = False) -> list[LatticeVector]:
        x0, y0, x1, y1 = self.bbox()
        return [LatticeVector(x, y)
                for x in range(x0, x1 + 1) for y in range(y0, y1 + 1)
                if self.contains((x, y), strict=interior_only)]

    @cached_property
    def interior_count(self) -> int:
        return len(self.lattice_points(interior_only=True))

    def translated(self, t: Sequence[int]) -> "LatticePolygon":
        return LatticePolygon(tuple(v + t for v in self.vertices))

    def normalized(self) -> "LatticePolygon":
        m = min(self.vertices)
        return self.translated(-m)

    def canonical(self) -> tuple:
        """Vertex tuple starting at the lexicographically smallest vertex."""
        vs = self.vertices
        i = vs.index(min(vs))
        return vs[i:] + vs[:i]

    def __eq__(self, other):
        if not isinstance(other, LatticePolygon):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())


def polygon_metrics(p: LatticePolygon) -> tuple[int, int, int]:
    return p.doubled_area, p.lattice_perimeter, p.interior_count


def interior_points_with_parity(p: LatticePolygon, parity: Sequence[int]) -> int:
    par = (parity[0] % 2, parity[1] % 2)
    return sum(1 for q in p.lattice_points(interior_only=True) if parity_of(q) == par)


def _check_balanced(vectors: Sequence[LatticeVector]) -> None:
    sx = sum(v.x for v in vectors)
    sy = sum(v.y for v in vectors)
    if (sx, sy) != (0, 0):
        raise NotBalanced(f"vectors sum to ({sx}, {sy})")


def _rank(vectors: Sequence[LatticeVector]) -> int:
    nz = [v for v in vectors if v != (0, 0)]
    if not nz:
        return 0
    first = nz[0]
    return 2 if any(wedge(first, v) != 0 for v in nz) else 1


def newton_polygon(vectors: Iterable[Sequence[int]]) -> LatticePolygon:
    vs = [vec(v) for v in vectors]
    if any(v == (0, 0) for v in vs):
        raise InvalidVector("degree vectors must be nonzero")
    _check_balanced(vs)
    if _rank(vs) < 2:
        raise Degenerate("degree vectors do not span the plane")
    # merge parallel vectors, then walk the rotated edges in angular order
    merged: dict[LatticeVector, int] = {}
    for v in vs:
        u = primitive(v)
        merged[u] = merged.get(u, 0) + lattice_length(v)
    edges = sorted_by_angle(rot_ccw(u) * k for u, k in merged.items())
    pts = [LatticeVector(0, 0)]
    for e in edges[:-1]:
        pts.append(pts[-1] + e)
    return LatticePolygon(tuple(pts)).normalized()


def side_normals(p: LatticePolygon) -> list[LatticeVector]:
    """Primitive outward normals of the sides of ``p``."""
    return [primitive(rot_cw(e)) for e in p.edges()]


@dataclass(frozen=True)
class DegreeSpec:
    """A balanced, spanning multiset of nonzero lattice vectors.

    Element order is preserved: element ``i`` keeps its identity, which
    matters once every element is assigned its own constraint line.
    """

    vectors: tuple[LatticeVector, ...]
    newton: LatticePolygon = field(compare=False, repr=False)
    is_even: bool = field(compare=False)
    half_interior_count: int | None = field(compare=False, default=None)

    def __len__(self):
        return len(self.vectors)

    @property
    def doubled_area(self) -> int:
        return self.newton.doubled_area

    @property
    def lattice_perimeter(self) -> int:
        return self.newton.lattice_perimeter

    def key(self) -> tuple:
        """Order-independent key of the multiset."""
        return tuple(sorted(self.vectors))


def validate_degree(vectors: Iterable[Sequence[int]], require_even: bool = False) -> DegreeSpec:
    vs = tuple(vec(v) for v in vectors)
    if not vs:
        raise Degenerate("empty degree")
    poly = newton_polygon(vs)
    even = all(v.x % 2 == 0 and v.y % 2 == 0 for v in vs)
    if require_even and not even:
        raise NotEven("degree has a vector with an odd coordinate")
    half = None
    if even:
        half = newton_polygon([(v.x // 2, v.y // 2) for v in vs]).interior_count
        # interior points of the half polygon via Pick on the doubled data
        if 8 * half != poly.doubled_area - 2 * poly.lattice_perimeter + 8:
            raise AssertionError("half-polygon interior count disagrees with Pick")
    return DegreeSpec(vs, poly, even, half)
