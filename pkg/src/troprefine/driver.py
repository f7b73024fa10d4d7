"""Elliptic invariants from cycle walks with grafted rational pieces.

Each closed walk from the scene gives a simple elliptic curve whose ends
are single degree elements or sums over grafted subsets.  Its refined
multiplicity, times the rational invariant of every grafted subset, is
one contribution to the elliptic invariant.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field, replace
from typing import Sequence

from .errors import (
    DuplicateCurve,
    EmptyVSet,
    FragmentMismatch,
    GeneralPositionFailure,
    ValidationError,
    ZeroSum,
)
from .lattice import DegreeSpec, LatticeVector, parity_of, primitive, validate_degree
from .laurent import ONE, ZERO, LaurentPoly
from .menelaus import (
    CycleData,
    InitialData,
    OrientedLine,
    Walk,
    build_initial_data,
    completing_line,
    hat_degree,
    vector_sum,
)
from .oracle import enumerate_rational_curves, g0_of_multiset
from .orientkit import refined_multiplicity_closed
from .tropcurve import (
    Classification,
    End,
    Edge,
    ParamTropicalCurve,
    check_balancing,
    classify_cells,
    curve_parity,
    genus_and_simplicity,
)

log = logging.getLogger(__name__)

THREADS_ENV = "TROP_REFINE_THREADS"


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


# ------------------------------------------------------------ graft sets

@dataclass(frozen=True)
class GraftSet:
    subsets: tuple[tuple[int, ...], ...]

    def validate(self, degree: DegreeSpec) -> None:
        n = len(degree.vectors)
        seen: set[int] = set()
        for s in self.subsets:
            if not s:
                raise ValidationError("grafted subsets must be nonempty")
            if seen & set(s):
                raise ValidationError("grafted subsets must be pairwise disjoint")
            if any(not 0 <= i < n for i in s):
                raise ValidationError(f"element index out of range in {s}")
            seen |= set(s)
            if vector_sum(degree.vectors[i] for i in s) == (0, 0):
                raise ZeroSum(f"grafted subset {s} sums to zero")
        if len(seen) == n:
            raise ValidationError("grafted subsets may not cover the whole degree")

    def sums(self, degree: DegreeSpec) -> list[LatticeVector]:
        return [vector_sum(degree.vectors[i] for i in s) for s in self.subsets]

    def hat_degrees(self, degree: DegreeSpec) -> list[list[LatticeVector]]:
        return [hat_degree(degree.vectors, s) for s in self.subsets]

    def items(self, degree: DegreeSpec) -> list[tuple[tuple[int, ...], int]]:
        """(elements, sign) for every walk item: grafted subsets, then the rest."""
        used = {i for s in self.subsets for i in s}
        out = [(tuple(s), -1) for s in self.subsets]
        out += [((i,), 1) for i in range(len(degree.vectors)) if i not in used]
        return out


def enumerate_H(degree) -> list[GraftSet]:
    """All families of disjoint nonempty subsets with nonzero sums and proper union."""
    degree_spec = degree if isinstance(degree, DegreeSpec) else validate_degree(degree)
    n = len(degree_spec.vectors)
    good = [tuple(i for i in range(n) if m >> i & 1) for m in range(1, 1 << n)
            if vector_sum(degree_spec.vectors[i] for i in range(n) if m >> i & 1) != (0, 0)]
    masks = {s: sum(1 << i for i in s) for s in good}
    full = (1 << n) - 1
    out: list[GraftSet] = []

    def rec(start, used, chosen):
        if used != full:
            out.append(GraftSet(tuple(chosen)))
        for k in range(start, len(good)):
            s = good[k]
            if masks[s] & used or (used | masks[s]) == full:
                continue
            chosen.append(s)
            rec(k + 1, used | masks[s], chosen)
            chosen.pop()

    rec(0, 0, [])
    return out


def assemble_O(H: GraftSet, ordering: Sequence[Sequence[int]], b, data: InitialData) -> CycleData:
    """Cycle data for grafting set H, items in the given order, start direction b.

    ``ordering`` lists the items as tuples of element indices; singletons not
    in H are plain ends.
    """
    H.validate(data.degree)
    expected = {tuple(s): sign for s, sign in H.items(data.degree)}
    order = [tuple(s) for s in ordering]
    if sorted(order) != sorted(expected):
        raise ValidationError("ordering is not a permutation of the items of H")
    vectors = [vector_sum(data.degree.vectors[i] for i in s) for s in order]
    cd = CycleData(
        vectors=vectors,
        lines=[completing_line(s, data.degree, data.lines) for s in order],
        signs=[expected[s] for s in order],
        x0=data.x0,
        b=LatticeVector(*b),
        labels=[("graft" if expected[s] < 0 else "end", s) for s in order],
    )
    cd.check()
    return cd


# --------------------------------------------------------------- grafting

def graft(T_O: ParamTropicalCurve, fragments: dict) -> ParamTropicalCurve:
    """Replace grafted ends of a walk curve by rational fragments.

    ``fragments`` maps the index of an end of ``T_O`` to a rational curve
    whose first end is the completing end (direction minus the end vector)
    and whose other ends carry element labels.
    """
    positions = list(T_O.positions)
    edges = list(T_O.edges)
    ends: list[End] = []
    for j, t in enumerate(T_O.ends):
        F = fragments.get(j)
        if F is None:
            ends.append(t)
            continue
        root_end = F.ends[0]
        if root_end.vector != -t.vector:
            raise FragmentMismatch(f"fragment for end {j} has the wrong completing direction")
        root = F.positions[root_end.vertex]
        start = T_O.positions[t.vertex]
        d = (root[0] - start[0], root[1] - start[1])
        if d[0] * t.vector[1] - d[1] * t.vector[0] != 0 or d[0] * t.vector[0] + d[1] * t.vector[1] <= 0:
            raise FragmentMismatch(f"fragment for end {j} does not sit on the end's ray")
        base = len(positions)
        positions.extend(F.positions)
        edges.append(Edge(t.vertex, base + root_end.vertex, t.vector))
        edges.extend(Edge(base + e.u, base + e.v, e.vector) for e in F.edges)
        ends.extend(End(base + s.vertex, s.vector, s.label) for s in F.ends[1:])
    return ParamTropicalCurve(positions, edges, ends, T_O.marked_point)


def fragment_choices(data: InitialData, walk: Walk) -> dict[int, list[ParamTropicalCurve]]:
    """Rational fragments available for each multi-element grafted end of a walk.

    Keys are end indices of the walk curve; each fragment's first end points
    along minus the grafted sum and lies on the completing line.
    """
    out = {}
    for j, item in enumerate(walk.items):
        if not item.grafted or len(item.elements) == 1:
            continue
        hat = hat_degree(data.degree.vectors, item.elements)
        line = data.line_for(item.elements)
        lines = [OrientedLine(hat[0], -line.value)] + [data.lines[i] for i in item.elements]
        out[j] = enumerate_rational_curves(hat, lines, labels=[None] + list(item.elements))
    return out


# ------------------------------------------------------------------ result

@dataclass
class Contribution:
    walk: Walk
    graft_factor: LaurentPoly
    multiplicity: LaurentPoly

    @property
    def value(self) -> LaurentPoly:
        return self.graft_factor * self.multiplicity

    @property
    def curve(self) -> ParamTropicalCurve:
        return self.walk.result.curve


@dataclass
class G1Report:
    total: LaurentPoly
    data: InitialData | None
    contributions: list[Contribution] = field(default_factory=list)
    empty_v_set: bool = False
    constraint_dependent: bool = False


def graft_factor(data: InitialData, walk: Walk, seed: int) -> LaurentPoly:
    factor = ONE
    for s in walk.graft_subsets():
        if len(s) == 1:
            continue  # the completed degree {-a, a} counts once
        factor = factor * g0_of_multiset(hat_degree(data.degree.vectors, s), seed)
    return factor


def walk_classification(T: ParamTropicalCurve, degree: DegreeSpec, parity) -> Classification:
    """Cell classes of a walk curve, with mobility read off the grafted elements.

    A grafted end stands for a tree whose ends are the subset's elements, so
    its vertex is mobile only if every element has the parity.  Without this
    a grafted sum of that parity would count as mobile and grafting would not
    be multiplicative.
    """
    cls = classify_cells(T, parity=parity)
    for t in T.ends:
        kind, elements = t.label
        if kind != "graft":
            continue
        cell = cls.triangles[t.vertex]
        if cell.mobile and any(parity_of(primitive(degree.vectors[i])) != tuple(parity) for i in elements):
            cls.triangles[t.vertex] = replace(cell, mobile=False)
    return cls


def _verify_walk_curve(T: ParamTropicalCurve, parity) -> None:
    rep = check_balancing(T)
    if not rep.ok:
        raise GeneralPositionFailure(f"walk curve is not balanced: {rep.message}")
    if genus_and_simplicity(T) != (1, True):
        raise GeneralPositionFailure("walk curve is not a simple elliptic curve")
    if curve_parity(T) != tuple(parity):
        raise GeneralPositionFailure("walk curve has the wrong parity")


def g1_report(degree, parity: Sequence[int], seed: int = 1, component: int | None = None,
              allow_nonadmissible: bool = False) -> G1Report:
    degree_spec = degree if isinstance(degree, DegreeSpec) else validate_degree(degree, require_even=True)
    par = (parity[0] % 2, parity[1] % 2)
    try:
        data = build_initial_data(degree_spec, par, seed, component=component,
                                  allow_nonadmissible=allow_nonadmissible,
                                  workers=worker_count())
    except EmptyVSet:
        return G1Report(ZERO, None, empty_v_set=True, constraint_dependent=allow_nonadmissible)
    contributions = []
    seen: dict = {}
    total = ZERO
    for walk in data.walks:
        T = walk.result.curve
        key = T.canonical_key()
        if key in seen:
            raise DuplicateCurve("two walks produced the same elliptic curve")
        seen[key] = walk
        _verify_walk_curve(T, par)
        factor = graft_factor(data, walk, seed)
        if factor.is_zero():
            continue
        mu = refined_multiplicity_closed(T, walk_classification(T, data.degree, par))
        c = Contribution(walk, factor, mu)
        contributions.append(c)
        total = total + c.value
    return G1Report(total, data, contributions, constraint_dependent=data.constraint_dependent)


def g1(degree, parity: Sequence[int], seed: int = 1, component: int | None = None,
       allow_nonadmissible: bool = False) -> LaurentPoly:
    return g1_report(degree, parity, seed, component, allow_nonadmissible).total
