"""Integer Laurent polynomials in q with half-integer exponents.

A polynomial is a map ``half_exponent -> coefficient`` where the stored key
is twice the exponent of q.  ``monomial(1, 4)`` is q^2.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import ParseError


class LaurentPoly:
    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        acc: dict[int, int] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for h, c in items:
            if int(h) != h or int(c) != c:
                raise ValueError("half exponents and coefficients must be integers")
            acc[int(h)] = acc.get(int(h), 0) + int(c)
        self._terms = {h: c for h, c in sorted(acc.items(), reverse=True) if c}
        self._hash = None

    @property
    def terms(self) -> dict[int, int]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def max_half_exponent(self) -> int:
        return max(self._terms)

    def min_half_exponent(self) -> int:
        return min(self._terms)

    def __add__(self, other):
        other = _coerce(other)
        out = dict(self._terms)
        for h, c in other._terms.items():
            out[h] = out.get(h, 0) + c
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({h: -c for h, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        out: dict[int, int] = {}
        for h1, c1 in self._terms.items():
            for h2, c2 in other._terms.items():
                out[h1 + h2] = out.get(h1 + h2, 0) + c1 * c2
        return LaurentPoly(out)

    __rmul__ = __mul__

    def inverted(self) -> "LaurentPoly":
        """Substitute q -> 1/q."""
        return LaurentPoly({-h: c for h, c in self._terms.items()})

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not supported")
        out = ONE
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, int):
            other = LaurentPoly({0: other})
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __repr__(self):
        return f"LaurentPoly({to_canonical_string(self)!r})"

    def __str__(self):
        return to_canonical_string(self)

    def substitute_inverse(self) -> "LaurentPoly":
        """q -> 1/q."""
        return LaurentPoly({-h: c for h, c in self._terms.items()})


def _coerce(x) -> LaurentPoly:
    if isinstance(x, LaurentPoly):
        return x
    if isinstance(x, int):
        return LaurentPoly({0: x})
    raise TypeError(f"cannot combine LaurentPoly with {type(x).__name__}")


ZERO = LaurentPoly()
ONE = LaurentPoly({0: 1})


def monomial(coeff: int, half_exponent: int) -> LaurentPoly:
    return LaurentPoly({half_exponent: coeff})


def add(p: LaurentPoly, r: LaurentPoly) -> LaurentPoly:
    return p + r


def mul(p: LaurentPoly, r: LaurentPoly) -> LaurentPoly:
    return p * r


def area_factor(doubled_area: int) -> LaurentPoly:
    """q^A - q^-A for a cell of Euclidean area A = doubled_area / 2."""
    return LaurentPoly({doubled_area: 1, -doubled_area: -1})


def _exact_sqrt(x: Fraction) -> Fraction:
    if x < 0:
        raise ValueError("square root of a negative rational")
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn != n or rd * rd != d:
        raise ValueError(f"{x} is not the square of a rational")
    return Fraction(rn, rd)


def eval_at(p: LaurentPoly, q0) -> Fraction:
    q0 = Fraction(q0)
    if q0 == 0:
        raise ZeroDivisionError("Laurent polynomial evaluated at q = 0")
    if any(h % 2 for h in p._terms):
        root = _exact_sqrt(q0)
        return sum((c * root ** h for h, c in p._terms.items()), Fraction(0))
    return sum((c * q0 ** (h // 2) for h, c in p._terms.items()), Fraction(0))


def _exp_text(h: int) -> str:
    return str(h // 2) if h % 2 == 0 else f"{h}/2"


def to_canonical_string(p: LaurentPoly) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for i, (h, c) in enumerate(p._terms.items()):
        mag = abs(c)
        if h == 0:
            body = str(mag)
        else:
            body = ("" if mag == 1 else f"{mag}*") + "q^" + _exp_text(h)
        if i == 0:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts)


_TERM = re.compile(r"^(?:(\d+)\*)?q\^(-?\d+)(/2)?$|^(\d+)$")


def parse(text: str) -> LaurentPoly:
    s = text.strip()
    if not s:
        raise ParseError("empty polynomial text")
    if s == "0":
        return ZERO
    sign = 1
    if s.startswith("-"):
        sign, s = -1, s[1:]
    pieces = re.split(r"\s+([+-])\s+", s)
    terms: dict[int, int] = {}
    signs = [sign] + [1 if op == "+" else -1 for op in pieces[1::2]]
    for sg, tok in zip(signs, pieces[0::2]):
        m = _TERM.match(tok.strip())
        if not m:
            raise ParseError(f"cannot parse term {tok!r}")
        if m.group(4) is not None:
            h, c = 0, int(m.group(4))
        else:
            c = int(m.group(1)) if m.group(1) else 1
            e = int(m.group(2))
            h = e if m.group(3) else 2 * e
        terms[h] = terms.get(h, 0) + sg * c
    return LaurentPoly(terms)


def to_json(p: LaurentPoly) -> dict:
    return {"terms": {str(h): c for h, c in p.items()}, "text": to_canonical_string(p)}


def from_json(obj) -> LaurentPoly:
    try:
        terms = {int(h): int(c) for h, c in obj["terms"].items()}
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ParseError(f"bad polynomial payload: {exc}") from exc
    p = LaurentPoly(terms)
    if "text" in obj and parse(obj["text"]) != p:
        raise ParseError("polynomial text and terms disagree")
    return p
