"""Brute-force enumeration of simple rational and elliptic curves through lines.

Every combinatorial type is tried and realised by an exact rational linear
solve.  This is slow but independent of the cycle walk, which makes it the
reference for cross-checks.
"""
from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .errors import DuplicateCurve, GeneralPositionFailure
from .lattice import DegreeSpec, LatticeVector, parity_of, rot_ccw, validate_degree, vec, wedge
from .laurent import ZERO, LaurentPoly
from .menelaus import OrientedLine, hat_degree, lam, ray_hit, vector_sum
from .orientkit import rational_multiplicity, refined_multiplicity_closed
from .tropcurve import End, Edge, ParamTropicalCurve, analyse_image, curve_parity

log = logging.getLogger(__name__)

MAX_ATTEMPTS = 12


# ------------------------------------------------------------ linear algebra

class Underdetermined(Exception):
    pass


def solve_exact(rows: Sequence[Sequence], rhs: Sequence):
    """Unique solution of rows * x = rhs, None if inconsistent.

    Raises Underdetermined when the system is consistent with a free variable.
    """
    n = len(rows[0]) if rows else 0
    m = [[Fraction(v) for v in r] + [Fraction(b)] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    if any(row[n] != 0 for row in m[r:]):
        return None
    if r < n:
        raise Underdetermined(f"rank {r} < {n}")
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = m[i][n]
    return x


# ---------------------------------------------------------- tree types

def trivalent_trees(n: int) -> list[list[tuple[int, int]]]:
    """All trivalent trees with leaves 0..n-1 and internal nodes n, n+1, ...

    Built by inserting leaf k into every edge of each tree on k leaves,
    giving (2n-5)!! trees.
    """
    if n < 3:
        return []
    trees = [[(0, n), (1, n), (2, n)]]
    for k in range(3, n):
        grown = []
        for t in trees:
            z = n + k - 2
            for i, (x, y) in enumerate(t):
                grown.append(t[:i] + t[i + 1:] + [(x, z), (z, y), (k, z)])
        trees = grown
    return trees


def double_factorial(k: int) -> int:
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


@dataclass
class _RootedType:
    order: list[int]  # internal nodes, parents first
    parent: dict[int, int]
    edge_vec: dict[int, LatticeVector]  # internal node -> vector from parent to it
    leaf_node: dict[int, int]  # leaf -> internal node


def _root_type(tree, vectors, root: int) -> _RootedType | None:
    n = len(vectors)
    adj: dict[int, list[int]] = {}
    for x, y in tree:
        adj.setdefault(x, []).append(y)
        adj.setdefault(y, []).append(x)
    parent = {root: -1}
    order = [root]
    for v in order:
        for w in adj[v]:
            if w not in parent:
                parent[w] = v
                if w >= n:
                    order.append(w)
    leaf_node = {i: parent[i] for i in range(n)}

    below: dict[int, LatticeVector] = {}
    for v in reversed(order):
        s = LatticeVector(0, 0)
        for w in adj[v]:
            if w == parent[v]:
                continue
            s = s + (vectors[w] if w < n else below[w])
        below[v] = s
    edge_vec = {v: below[v] for v in order if v != root}
    if any(e == (0, 0) for e in edge_vec.values()):
        return None
    for v in order:
        out = []
        for w in adj[v]:
            if w == parent[v]:
                out.append(-edge_vec[v])
            elif w < n:
                out.append(vectors[w])
            else:
                out.append(edge_vec[w])
        if any(wedge(out[i], out[j]) == 0 for i in range(3) for j in range(i + 1, 3)):
            return None
    return _RootedType(order, parent, edge_vec, leaf_node)


def _realise_tree(rt: _RootedType, vectors, lines, labels) -> ParamTropicalCurve | None:
    nodes = rt.order
    root = nodes[0]
    bounded = nodes[1:]
    col = {v: 2 + i for i, v in enumerate(bounded)}

    def path(v):
        out = []
        while v != root:
            out.append(v)
            v = rt.parent[v]
        return out

    paths = {v: path(v) for v in nodes}
    rows, rhs = [], []
    for leaf, v in rt.leaf_node.items():
        a = vectors[leaf]
        row = [Fraction(0)] * (2 + len(bounded))
        row[0], row[1] = a[1], -a[0]
        for e in paths[v]:
            row[col[e]] += lam(a, rt.edge_vec[e])
        rows.append(row)
        rhs.append(lines[leaf].value)
    try:
        sol = solve_exact(rows, rhs)
    except Underdetermined as exc:
        raise GeneralPositionFailure(f"rational type has a family of solutions: {exc}") from exc
    if sol is None:
        return None
    lengths = {e: sol[col[e]] for e in bounded}
    if any(t == 0 for t in lengths.values()):
        raise GeneralPositionFailure("a bounded edge has length zero")
    if any(t < 0 for t in lengths.values()):
        return None
    index = {v: i for i, v in enumerate(nodes)}
    pos = {root: (sol[0], sol[1])}
    for v in bounded:
        p, e, t = pos[rt.parent[v]], rt.edge_vec[v], lengths[v]
        pos[v] = (p[0] + t * e[0], p[1] + t * e[1])
    edges = [Edge(index[rt.parent[v]], index[v], rt.edge_vec[v]) for v in bounded]
    ends = [End(index[rt.leaf_node[i]], vectors[i], labels[i]) for i in range(len(vectors))]
    T = ParamTropicalCurve([pos[v] for v in nodes], edges, ends)
    if not analyse_image(T).simple:
        return None
    return T


def enumerate_rational_curves(degree, lines: Sequence[OrientedLine], labels=None) -> list[ParamTropicalCurve]:
    vectors = [vec(v) for v in (degree.vectors if isinstance(degree, DegreeSpec) else degree)]
    validate_degree(vectors)
    n = len(vectors)
    if len(lines) != n:
        raise ValueError("one line per degree element is required")
    for v, L in zip(vectors, lines):
        if L.direction != v:
            raise ValueError(f"line direction {L.direction} does not match vector {v}")
    labels = list(range(n)) if labels is None else list(labels)
    if n < 3 or sum((L.value for L in lines), Fraction(0)) != 0:
        return []
    found: dict = {}
    for tree in trivalent_trees(n):
        rt = _root_type(tree, vectors, n)
        if rt is None:
            continue
        T = _realise_tree(rt, vectors, lines, labels)
        if T is None:
            continue
        key = T.canonical_key()
        if key in found:
            raise DuplicateCurve("two tree types realise the same rational curve")
        found[key] = T
    return [found[k] for k in sorted(found, key=repr)]


# -------------------------------------------------------- random constraints

def random_values(rng: random.Random, n: int, den: int = 997) -> list[Fraction]:
    nums = [rng.randint(-den, den) for _ in range(n - 1)]
    return [Fraction(p, den) for p in nums + [-sum(nums)]]


def random_lines(vectors, rng: random.Random) -> list[OrientedLine]:
    return [OrientedLine(v, val) for v, val in zip(vectors, random_values(rng, len(vectors)))]


def g0_curves(degree, seed: int = 0):
    """Rational curves through seeded generic lines (retrying on degeneracy)."""
    vectors = [vec(v) for v in (degree.vectors if isinstance(degree, DegreeSpec) else degree)]
    validate_degree(vectors)
    rng = random.Random(seed)
    for attempt in range(MAX_ATTEMPTS):
        lines = random_lines(vectors, rng)
        try:
            return lines, enumerate_rational_curves(vectors, lines)
        except GeneralPositionFailure as exc:
            log.debug("g0 attempt %d re-drawn: %s", attempt, exc)
    raise GeneralPositionFailure("no generic line configuration found")


def g0(degree, seed: int = 0) -> LaurentPoly:
    _, curves = g0_curves(degree, seed)
    total = ZERO
    for T in curves:
        total = total + rational_multiplicity(T)
    return total


@lru_cache(maxsize=None)
def g0_cached(key: tuple, seed: int) -> LaurentPoly:
    return g0(list(key), seed)


def g0_of_multiset(vectors, seed: int = 0) -> LaurentPoly:
    """g0 memoised by the multiset of vectors; collinear multisets give 0."""
    vs = tuple(sorted(vec(v) for v in vectors))
    if not any(wedge(vs[0], v) for v in vs):
        return ZERO
    return g0_cached(vs, seed)


# ------------------------------------------------------ elliptic curves

@dataclass
class _Block:
    elements: tuple[int, ...]
    vector: LatticeVector
    line: OrientedLine
    fragments: list  # rational curves of the completed degree, root = vertex of end 0


def _blocks(vectors, lines) -> dict[tuple[int, ...], _Block]:
    n = len(vectors)
    out = {}
    for mask in range(1, (1 << n) - 1):
        s = tuple(i for i in range(n) if mask >> i & 1)
        c = vector_sum(vectors[i] for i in s)
        if c == (0, 0):
            continue
        val = sum((lines[i].value for i in s), Fraction(0))
        frags = []
        if len(s) >= 2:
            hat = hat_degree(vectors, s)
            if not any(wedge(hat[0], v) for v in hat):
                continue
            hat_lines = [OrientedLine(hat[0], -val)] + [lines[i] for i in s]
            frags = enumerate_rational_curves(hat, hat_lines, labels=[None] + list(s))
            if not frags:
                continue
        out[s] = _Block(s, c, OrientedLine(c, val), frags)
    return out


def _arrangements(n: int, blocks: dict):
    """Cyclic block sequences up to rotation and reflection, at least 3 blocks."""
    by_first: dict[int, list] = {}
    for s in blocks:
        by_first.setdefault(s[0], []).append(s)

    def extend(seq, used):
        if used == (1 << n) - 1:
            if len(seq) >= 3 and seq[1][0] < seq[-1][0]:
                yield list(seq)
            return
        for s in blocks:
            m = 0
            for i in s:
                m |= 1 << i
            if m & used:
                continue
            seq.append(s)
            yield from extend(seq, used | m)
            seq.pop()

    for s in by_first.get(0, []):
        m = 0
        for i in s:
            m |= 1 << i
        yield from extend([s], m)


def _difference_directions(vectors) -> set[LatticeVector]:
    poly = validate_degree(vectors).newton
    pts = poly.lattice_points()
    return {rot_ccw(LatticeVector(p.x - q.x, p.y - q.y)) for p in pts for q in pts if p != q}


def _solve_cycle(svecs, svals, b_list, x0, j):
    """Solve the cycle with x0 on edge j; returns (x_1, lengths) or None."""
    m = len(svecs)
    ncol = 2 + m
    rows, rhs = [], []
    for k in range(m):
        a = svecs[k]
        row = [Fraction(0)] * ncol
        row[0], row[1] = a[1], -a[0]
        for i in range(k):
            row[2 + i] = lam(a, b_list[i])
        rows.append(row)
        rhs.append(svals[k])
    for coord in (0, 1):
        row = [Fraction(0)] * ncol
        for i in range(m):
            row[2 + i] = b_list[i][coord]
        rows.append(row)
        rhs.append(0)
    bj = b_list[j]
    row = [Fraction(0)] * ncol
    # wedge(x_j - x0, b_j) = 0
    row[0], row[1] = bj[1], -bj[0]
    for i in range(j):
        row[2 + i] = wedge(b_list[i], bj)
    rows.append(row)
    rhs.append(x0[0] * bj[1] - x0[1] * bj[0])
    try:
        sol = solve_exact(rows, rhs)
    except Underdetermined as exc:
        raise GeneralPositionFailure(f"elliptic type has a family of solutions: {exc}") from exc
    if sol is None:
        return None
    return (sol[0], sol[1]), sol[2:]


def enumerate_elliptic_curves(degree, parity, lines: Sequence[OrientedLine], x0) -> list[ParamTropicalCurve]:
    vectors = [vec(v) for v in (degree.vectors if isinstance(degree, DegreeSpec) else degree)]
    n = len(vectors)
    par = (parity[0] % 2, parity[1] % 2)
    x0 = (Fraction(x0[0]), Fraction(x0[1]))
    if sum((L.value for L in lines), Fraction(0)) != 0:
        return []
    blocks = _blocks(vectors, lines)
    _check_base_point_generic(x0, blocks)
    dirs = _difference_directions(vectors)
    b_cands = sorted(b for b in dirs if parity_of(b) == par)
    found: dict = {}
    for arr in _arrangements(n, blocks):
        bl = [blocks[s] for s in arr]
        svecs = [B.vector for B in bl]
        svals = [B.line.value for B in bl]
        m = len(bl)
        for b in b_cands:
            b_list, bk = [], b
            for s in svecs:
                bk = bk - s
                b_list.append(bk)
            if any(d not in dirs for d in b_list):
                continue
            if any(wedge(b_list[k - 1], svecs[k]) == 0 or wedge(b_list[k], svecs[k]) == 0
                   for k in range(m)):
                continue
            for j in range(m):
                # cheap filter: x0 on edge j needs its endpoints on the two block lines
                back = ray_hit(x0, b_list[j], bl[j].line)
                ahead = ray_hit(x0, b_list[j], bl[(j + 1) % m].line)
                if back is None or ahead is None or not back < 0 < ahead:
                    continue
                res = _solve_cycle(svecs, svals, b_list, x0, j)
                if res is None:
                    continue
                x1, lengths = res
                if any(t == 0 for t in lengths):
                    raise GeneralPositionFailure("a cycle edge has length zero")
                if any(t < 0 for t in lengths):
                    continue
                for T in _attach_fragments(bl, x1, b_list, lengths, x0, j):
                    rep = analyse_image(T)
                    if not rep.simple:
                        raise GeneralPositionFailure(f"non-simple elliptic solution: {rep.reason}")
                    if curve_parity(T) != par:
                        continue
                    key = T.canonical_key()
                    if key in found:
                        raise DuplicateCurve("an elliptic curve was found twice")
                    found[key] = T
    return [found[k] for k in sorted(found, key=repr)]


def _check_base_point_generic(x0, blocks) -> None:
    for B in blocks.values():
        if B.line.contains(x0):
            raise GeneralPositionFailure("base point on a constraint line")


def _attach_fragments(bl, x1, b_list, lengths, x0, j):
    m = len(bl)
    pts = [x1]
    for k in range(m - 1):
        p, t, d = pts[-1], lengths[k], b_list[k]
        pts.append((p[0] + t * d[0], p[1] + t * d[1]))
    # edge k runs from vertex k to k+1 with vector b_list[k]; edge j must hold x0
    choices = []
    for k, B in enumerate(bl):
        if len(B.elements) == 1:
            choices.append([None])
            continue
        ok = []
        for F in B.fragments:
            root = F.ends[0].vertex
            r = F.positions[root]
            d = (r[0] - pts[k][0], r[1] - pts[k][1])
            if d[0] * B.vector[0] + d[1] * B.vector[1] > 0:
                ok.append(F)
        if not ok:
            return
        choices.append(ok)
    for pick in itertools.product(*choices):
        positions = list(pts)
        edges = [Edge(k, (k + 1) % m, b_list[k]) for k in range(m)]
        ends = []
        for k, (B, F) in enumerate(zip(bl, pick)):
            if F is None:
                ends.append(End(k, B.vector, B.elements[0]))
                continue
            base = len(positions)
            positions.extend(F.positions)
            edges.append(Edge(k, base + F.ends[0].vertex, B.vector))
            edges.extend(Edge(base + e.u, base + e.v, e.vector) for e in F.edges)
            ends.extend(End(base + t.vertex, t.vector, t.label) for t in F.ends[1:])
        ends.sort(key=lambda t: t.label)
        yield ParamTropicalCurve(positions, edges, ends, (("edge", j), x0))


def random_base_point(rng: random.Random, den: int = 991):
    return (Fraction(rng.randint(-3 * den, 3 * den), den), Fraction(rng.randint(-3 * den, 3 * den), den))


def g1_oracle_curves(degree, parity, seed: int = 0):
    vectors = [vec(v) for v in (degree.vectors if isinstance(degree, DegreeSpec) else degree)]
    validate_degree(vectors, require_even=True)
    rng = random.Random(seed)
    for attempt in range(MAX_ATTEMPTS):
        lines = random_lines(vectors, rng)
        x0 = random_base_point(rng)
        try:
            return lines, x0, enumerate_elliptic_curves(vectors, parity, lines, x0)
        except GeneralPositionFailure as exc:
            log.debug("elliptic attempt %d re-drawn: %s", attempt, exc)
    raise GeneralPositionFailure("no generic elliptic constraint found")


def g1_oracle(degree, parity, seed: int = 0, allow_nonadmissible: bool = False) -> LaurentPoly:
    from .menelaus import is_admissible
    from .errors import NotAdmissible

    degree_spec = degree if isinstance(degree, DegreeSpec) else validate_degree(degree, require_even=True)
    if not allow_nonadmissible and not is_admissible(degree_spec, parity):
        raise NotAdmissible(f"parity {tuple(parity)} is not admissible for this degree")
    _, _, curves = g1_oracle_curves(degree_spec, parity, seed)
    total = ZERO
    for T in curves:
        total = total + refined_multiplicity_closed(T)
    return total
