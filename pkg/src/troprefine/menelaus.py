"""Constraint lines, the far-away scene for elliptic counts, and the cycle walk.

A constraint line for a degree vector ``a`` is the level set of
``lam(a, x) = a.y*x1 - a.x*x2``.  Curves with ends on lines exist only if
the values sum to zero.

The scene (``InitialData``) puts all lines close to the origin, picks an
unbounded region K far from every line direction, a set of admissible
cycle directions, and a base point x0 deep inside K.  Cycle walks start at
x0 and trace the cycle of an elliptic curve by intersecting rays with
lines.
"""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import (
    DegenerateWedge,
    EmptyVSet,
    GeneralPositionFailure,
    NotAdmissible,
    NotEven,
    ZeroSum,
)
from .lattice import (
    DegreeSpec,
    LatticeVector,
    dot,
    primitive,
    rot_ccw,
    side_normals,
    sorted_by_angle,
    validate_degree,
    wedge,
    parity_of,
)
from .tropcurve import End, Edge, ParamTropicalCurve, genus_and_simplicity

log = logging.getLogger(__name__)


def lam(a: Sequence[int], x) -> Fraction:
    return a[1] * x[0] - a[0] * x[1]


@dataclass(frozen=True)
class OrientedLine:
    direction: LatticeVector
    value: Fraction

    def contains(self, x) -> bool:
        return lam(self.direction, x) == self.value

    def geometric_key(self) -> tuple:
        """Key identifying the underlying unoriented line."""
        u = primitive(self.direction)
        k = self.direction.x // u.x if u.x else self.direction.y // u.y
        val = Fraction(self.value) / k
        if u.x < 0 or (u.x == 0 and u.y < 0):
            u, val = -u, -val
        return (u, val)

    def scaled(self, s) -> "OrientedLine":
        return OrientedLine(self.direction, self.value * s)


def lambda_and_menelaus(lines: Sequence[OrientedLine]) -> tuple[list[Fraction], Fraction]:
    vals = [Fraction(L.value) for L in lines]
    return vals, sum(vals, Fraction(0))


def vector_sum(vectors) -> LatticeVector:
    sx = sy = 0
    for v in vectors:
        sx += v[0]
        sy += v[1]
    return LatticeVector(sx, sy)


def completing_line(subset: Sequence[int], degree: Sequence[Sequence[int]] | DegreeSpec,
                    lines: Sequence[OrientedLine]) -> OrientedLine:
    vectors = degree.vectors if isinstance(degree, DegreeSpec) else degree
    c = vector_sum(vectors[i] for i in subset)
    if c == (0, 0):
        raise ZeroSum(f"subset {sorted(subset)} sums to zero")
    return OrientedLine(c, sum((Fraction(lines[i].value) for i in subset), Fraction(0)))


def line_intersection(L1: OrientedLine, L2: OrientedLine):
    a, b = L1.direction, L2.direction
    det = wedge(a, b)
    if det == 0:
        return None
    v1, v2 = Fraction(L1.value), Fraction(L2.value)
    return ((a.x * v2 - b.x * v1) / det, (a.y * v2 - b.y * v1) / det)


def ray_hit(x, d, L: OrientedLine):
    """Parameter t with x + t*d on L, or None when parallel."""
    den = wedge(d, L.direction)
    if den == 0:
        return None
    return (L.value - lam(L.direction, x)) / den


def norm2(x) -> Fraction:
    return x[0] * x[0] + x[1] * x[1]


def line_misses_unit_disc(x, d) -> bool:
    """Is the line through x with direction d at distance > 1 from 0?"""
    w = x[0] * d[1] - x[1] * d[0]
    return w * w > dot(d, d)


# ----------------------------------------------------------- cycle data

@dataclass(frozen=True)
class Item:
    """One step of a walk: a vector with its line and sign."""

    elements: tuple[int, ...]
    vector: LatticeVector
    line: OrientedLine
    sign: int

    @property
    def grafted(self) -> bool:
        return self.sign < 0


@dataclass
class CycleData:
    vectors: list[LatticeVector]
    lines: list[OrientedLine]
    signs: list[int]
    x0: tuple
    b: LatticeVector
    labels: list = field(default_factory=list)

    def check(self) -> None:
        if vector_sum(self.vectors) != (0, 0):
            raise ZeroSum("cycle data vectors do not sum to zero")
        bk = self.b
        for a in self.vectors:
            if wedge(bk, a) == 0:
                raise DegenerateWedge("a step direction is parallel to its vector")
            bk = bk - a

    def x0_between_crossings(self) -> bool:
        t1 = ray_hit(self.x0, self.b, self.lines[0])
        tr = ray_hit(self.x0, self.b, self.lines[-1])
        return t1 is not None and tr is not None and t1 > 0 > tr


@dataclass
class Stopped:
    step: int
    reason: str  # "ray-miss" | "sign-violation" | "closure"

    def __bool__(self):
        return False


@dataclass
class WalkResult:
    points: list  # x_1 .. x_r
    directions: list[LatticeVector]  # b_1 .. b_r (b_r == b)
    curve: ParamTropicalCurve


def cycle_procedure(data: CycleData):
    data.check()
    x, bk = data.x0, data.b
    points, dirs = [], []
    for k, (a, L, eps) in enumerate(zip(data.vectors, data.lines, data.signs), start=1):
        w = wedge(bk, a)
        if eps * w < 0:
            return Stopped(k, "sign-violation")
        t = ray_hit(x, bk, L)
        # t == 0 would put two cycle vertices at one point
        if t is None or t <= 0:
            return Stopped(k, "ray-miss")
        x = (x[0] + t * bk[0], x[1] + t * bk[1])
        bk = bk - a
        points.append(x)
        dirs.append(bk)
    if not on_open_ray(points[-1], data.b, data.x0):
        return Stopped(len(data.vectors), "closure")
    labels = data.labels or list(range(len(data.vectors)))
    return WalkResult(points, dirs, assemble_cycle_curve(points, dirs, data.vectors, labels, data.x0))


def on_open_ray(start, d, x) -> bool:
    r = (x[0] - start[0], x[1] - start[1])
    return r[0] * d[1] - r[1] * d[0] == 0 and r[0] * d[0] + r[1] * d[1] > 0


def assemble_cycle_curve(points, dirs, vectors, labels, x0) -> ParamTropicalCurve:
    r = len(points)
    edges = [Edge(k, k + 1, dirs[k]) for k in range(r - 1)]
    edges.append(Edge(r - 1, 0, dirs[-1]))
    ends = [End(k, vectors[k], labels[k]) for k in range(r)]
    return ParamTropicalCurve(list(points), edges, ends, (("edge", r - 1), x0))


# ------------------------------------------------------------ the scene

def is_admissible(degree: DegreeSpec, parity: Sequence[int]) -> bool:
    par = (parity[0] % 2, parity[1] % 2)
    return sum(1 for n in side_normals(degree.newton) if parity_of(n) == par) <= 1


@dataclass
class Sector:
    """Open cone swept counter-clockwise from ``cw`` to ``ccw``."""

    cw: LatticeVector
    ccw: LatticeVector

    def inside(self, d) -> bool:
        return wedge(self.cw, d) > 0 and wedge(d, self.ccw) > 0

    def axis(self) -> LatticeVector:
        return primitive(self.cw) + primitive(self.ccw)


@dataclass
class InitialData:
    degree: DegreeSpec
    parity: tuple[int, int]
    seed: int
    rho0: Fraction
    lines: list[OrientedLine]
    subsets: list[tuple[int, ...]]  # nonempty proper subsets with nonzero sum
    sectors: list[Sector]
    component: int
    b_candidates: list[LatticeVector]
    x0: tuple
    scale_steps: int = 0
    x0_doublings: int = 0
    walks: list = field(default_factory=list, repr=False)
    constraint_dependent: bool = False

    @property
    def K(self) -> Sector:
        return self.sectors[self.component]

    def K_descriptor(self) -> dict:
        """Half-planes of the far part of K, plus its recession direction."""
        s = self.K
        return {"recession": tuple(s.axis()),
                "half_planes": [("wedge(cw, x) > 0", tuple(s.cw)), ("wedge(x, ccw) > 0", tuple(s.ccw))],
                "excluded": "unit disc and unit-width strips around every line direction"}

    def line_for(self, subset: Sequence[int]) -> OrientedLine:
        return completing_line(subset, self.degree, self.lines)


def proper_subsets(n: int, vectors) -> list[tuple[int, ...]]:
    out = []
    for mask in range(1, (1 << n) - 1):
        s = tuple(i for i in range(n) if mask >> i & 1)
        if vector_sum(vectors[i] for i in s) != (0, 0):
            out.append(s)
    return out


def hat_degree(vectors, subset) -> list[LatticeVector]:
    c = vector_sum(vectors[i] for i in subset)
    return [-c] + [vectors[i] for i in subset]


def _spans_plane(vs) -> bool:
    return any(wedge(vs[0], v) != 0 for v in vs)


def _draw_values(rng: random.Random, n: int, attempt: int) -> list[Fraction]:
    den = 1009 + 2 * attempt
    while True:
        nums = [rng.randint(-den, den) for _ in range(n - 1)]
        last = -sum(nums)
        vals = [Fraction(p, den) for p in nums + [last]]
        if len(set(vals)) == n:
            return vals


def _lines_generic(degree: DegreeSpec, lines, subsets) -> bool:
    n = len(degree.vectors)
    seen = {}
    full = tuple(range(n))
    for s in subsets:
        key = completing_line(s, degree, lines).geometric_key()
        comp = tuple(i for i in full if i not in s)
        other = seen.get(key)
        if other is not None and other != comp and other != s:
            return False
        seen.setdefault(key, s)
    return True


def family_directions(degree: DegreeSpec, subsets) -> list[LatticeVector]:
    dirs = set()
    for s in subsets:
        c = vector_sum(degree.vectors[i] for i in s)
        u = primitive(c)
        dirs.add(u)
        dirs.add(-u)
    return sorted_by_angle(dirs)


def sectors_of(dirs: list[LatticeVector]) -> list[Sector]:
    return [Sector(dirs[i], dirs[(i + 1) % len(dirs)]) for i in range(len(dirs))]


def quadrant_sectors(sectors: list[Sector], parity) -> list[int]:
    """Indices of sectors meeting the open quadrant attached to a parity."""
    sx = 1 if parity[0] % 2 == 0 else -1
    sy = 1 if parity[1] % 2 == 0 else -1
    q1, q2 = LatticeVector(sx, 0), LatticeVector(0, sy)
    if wedge(q1, q2) < 0:
        q1, q2 = q2, q1
    quad = Sector(q1, q2)
    out = []
    for i, s in enumerate(sectors):
        probes = [a + b for a in (primitive(s.cw), q1) for b in (primitive(s.ccw), q2)]
        if any(s.inside(d) and quad.inside(d) for d in probes):
            out.append(i)
    return out


def cycle_directions(degree: DegreeSpec, parity, sector: Sector) -> list[LatticeVector]:
    pts = degree.newton.lattice_points()
    diffs = {LatticeVector(p.x - q.x, p.y - q.y) for p in pts for q in pts if p != q}
    par = (parity[0] % 2, parity[1] % 2)
    out = []
    for d in diffs:
        b = rot_ccw(d)
        if parity_of(b) != par:
            continue
        if wedge(b, sector.cw) <= 0 or wedge(b, sector.ccw) <= 0:
            continue
        out.append(b)
    return sorted(out)


def build_initial_data(degree: DegreeSpec | Sequence, parity: Sequence[int], seed: int = 1,
                       component: int | None = None, allow_nonadmissible: bool = False,
                       certify: bool = True, max_attempts: int = 20,
                       workers: int = 1) -> InitialData:
    from . import oracle

    if not isinstance(degree, DegreeSpec):
        degree = validate_degree(degree, require_even=True)
    if not degree.is_even:
        raise NotEven("elliptic counts need an even degree")
    parity = (parity[0] % 2, parity[1] % 2)
    if parity == (0, 0):
        raise NotAdmissible("parity (0,0) is not allowed")
    admissible = is_admissible(degree, parity)
    if not admissible and not allow_nonadmissible:
        raise NotAdmissible(f"more than one side normal has parity {parity}")
    n = len(degree.vectors)
    subsets = proper_subsets(n, degree.vectors)
    fam = family_directions(degree, subsets)
    sectors = sectors_of(fam)
    rng = random.Random(seed)
    if component is None:
        component = rng.choice(quadrant_sectors(sectors, parity) or list(range(len(sectors))))
    if not 0 <= component < len(sectors):
        raise ValueError(f"component index {component} out of range (0..{len(sectors) - 1})")
    sector = sectors[component]
    bset = cycle_directions(degree, parity, sector)
    if not bset:
        raise EmptyVSet(f"no cycle direction of parity {parity} for this region")

    for attempt in range(max_attempts):
        vals = _draw_values(rng, n, attempt)
        lines = [OrientedLine(v, val) for v, val in zip(degree.vectors, vals)]
        if not _lines_generic(degree, lines, subsets):
            continue
        try:
            worst = _scene_radius2(degree, lines, subsets)
        except GeneralPositionFailure:
            continue
        # shrink all values by a power of two until every point is inside the unit disc
        steps = 0
        scale = Fraction(1)
        while worst * scale * scale >= Fraction(1, 4):
            scale /= 2
            steps += 1
        lines = [L.scaled(scale) for L in lines]
        rho0 = _tight_rho(degree, lines, subsets)
        data = InitialData(degree, parity, seed, rho0, lines, subsets, sectors, component, bset,
                           (Fraction(0), Fraction(0)), scale_steps=steps,
                           constraint_dependent=not admissible)
        try:
            _place_base_point(data, fam, certify, workers)
        except GeneralPositionFailure as exc:
            log.debug("re-drawing constraint values: %s", exc)
            continue
        return data
    raise GeneralPositionFailure("could not find generic constraint values")


def _tight_rho(degree, lines, subsets) -> Fraction:
    """Smallest power of two bounding every line's distance to its origin parallel."""
    r2 = max(L.value * L.value / dot(L.direction, L.direction)
             for L in (completing_line(s, degree, lines) for s in subsets))
    rho = Fraction(1)
    while rho * rho > 4 * r2 and r2 > 0:
        rho /= 2
    while not rho * rho > r2:
        rho *= 2
    return rho


def _scene_radius2(degree, lines, subsets) -> Fraction:
    """Largest squared norm among line crossings and auxiliary rational curve vertices."""
    from . import oracle

    uniq = {}
    for s in subsets:
        L = completing_line(s, degree, lines)
        uniq.setdefault(L.geometric_key(), L)
    ls = list(uniq.values())
    worst = Fraction(0)
    for i in range(len(ls)):
        for j in range(i + 1, len(ls)):
            p = line_intersection(ls[i], ls[j])
            if p is not None:
                worst = max(worst, norm2(p))
    for s in subsets:
        if len(s) < 2:
            continue
        hat = hat_degree(degree.vectors, s)
        if not _spans_plane(hat):
            continue
        c_line = completing_line(s, degree, lines)
        hat_lines = [OrientedLine(hat[0], -c_line.value)] + [lines[i] for i in s]
        for T in oracle.enumerate_rational_curves(hat, hat_lines):
            for p in T.positions:
                worst = max(worst, norm2(p))
    return worst


def in_K(data: InitialData, x, fam) -> bool:
    if norm2(x) <= 1 or not data.K.inside(x):
        return False
    return all(line_misses_unit_disc(x, u) for u in fam)


def _place_base_point(data: InitialData, fam, certify: bool, workers: int = 1) -> None:
    u = data.K.axis()
    t = Fraction(2)
    for doubling in range(40):
        x0 = (t * u[0], t * u[1])
        ok = in_K(data, x0, fam) and all(line_misses_unit_disc(x0, b) for b in data.b_candidates)
        if ok:
            data.x0 = x0
            data.x0_doublings = doubling
            if not certify:
                return
            walks, clean = explore_walks(data, workers=workers)
            if clean:
                data.walks = walks
                return
        t *= 2
    raise GeneralPositionFailure("no base point certified far enough inside K")


# --------------------------------------------------------- walk search

@dataclass
class Walk:
    items: list[Item]
    b: LatticeVector
    result: WalkResult

    def graft_subsets(self) -> list[tuple[int, ...]]:
        return [it.elements for it in self.items if it.grafted]


def step_items(data: InitialData, used_mask: int, zero_hat: set) -> list[Item]:
    n = len(data.degree.vectors)
    free = [i for i in range(n) if not used_mask >> i & 1]
    out = []
    for k in range(1, 1 << len(free)):
        s = tuple(free[i] for i in range(len(free)) if k >> i & 1)
        if len(s) == n:
            continue
        c = vector_sum(data.degree.vectors[i] for i in s)
        if c == (0, 0) or s in zero_hat:
            continue
        L = data.line_for(s)
        if len(s) == 1:
            out.append(Item(s, c, L, 1))
        out.append(Item(s, c, L, -1))
    return out


def explore_walks(data: InitialData, zero_hat: set | None = None, workers: int = 1):
    """Depth-first search over all walks from x0, for every candidate b.

    Returns (successful walks, clean) where clean is False as soon as some
    produced cycle line meets the unit disc, which means x0 must move out.
    """
    if zero_hat is None:
        zero_hat = degenerate_hat_subsets(data)
    bs = list(data.b_candidates)
    if workers > 1 and len(bs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=min(workers, len(bs))) as pool:
            parts = list(pool.map(_explore_one, [(data, b, zero_hat) for b in bs]))
    else:
        parts = [explore_one_direction(data, b, zero_hat) for b in bs]
    found: list[Walk] = []
    for walks, clean in parts:
        if not clean:
            return [], False
        found.extend(walks)
    return found, True


def _explore_one(args):
    return explore_one_direction(*args)


def explore_one_direction(data: InitialData, b: LatticeVector, zero_hat: set):
    n = len(data.degree.vectors)
    full = (1 << n) - 1
    item_cache: dict[int, list[Item]] = {}
    found: list[Walk] = []

    def items(mask):
        if mask not in item_cache:
            item_cache[mask] = step_items(data, mask, zero_hat)
        return item_cache[mask]

    stack = [(0, data.x0, b, (), False)]
    while stack:
        mask, x, bk, seq, has_plain = stack.pop()
        for it in items(mask):
            w = wedge(bk, it.vector)
            if w == 0:
                # a degenerate vertex; no curve continues this way
                continue
            if it.sign * w < 0:
                continue
            t = ray_hit(x, bk, it.line)
            if t is None or t <= 0:
                continue
            nx = (x[0] + t * bk[0], x[1] + t * bk[1])
            nb = bk - it.vector
            if not line_misses_unit_disc(nx, nb):
                return found, False
            nmask = mask
            for i in it.elements:
                nmask |= 1 << i
            nseq = seq + (it,)
            nplain = has_plain or not it.grafted
            if nmask != full:
                stack.append((nmask, nx, nb, nseq, nplain))
                continue
            if not nplain:
                continue
            cd = CycleData([i.vector for i in nseq], [i.line for i in nseq],
                           [i.sign for i in nseq], data.x0, b, [_label(i) for i in nseq])
            if not cd.x0_between_crossings():
                continue
            res = cycle_procedure(cd)
            if isinstance(res, Stopped):
                continue
            g, simple = genus_and_simplicity(res.curve)
            if g != 1 or not simple:
                raise GeneralPositionFailure("a closed walk is not a simple elliptic curve")
            found.append(Walk(list(nseq), b, res))
    found.sort(key=lambda w: [(it.elements, it.sign) for it in w.items])
    return found, True


def _label(item: Item):
    return ("graft" if item.grafted else "end", item.elements)


def degenerate_hat_subsets(data: InitialData) -> set:
    """Multi-element subsets whose completed degree is collinear (no curves)."""
    out = set()
    for s in data.subsets:
        if len(s) >= 2 and not _spans_plane(hat_degree(data.degree.vectors, s)):
            out.add(s)
    return out
