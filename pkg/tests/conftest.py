"""Shared degrees and independent brute-force helpers."""
from __future__ import annotations

from math import comb

import pytest

from troprefine.laurent import ZERO, area_factor, monomial

QUARTIC = [(-2, 0), (-2, 0), (0, -2), (0, -2), (2, 2), (2, 2)]
TRI2 = [(-2, 0), (0, -2), (2, 2)]
QUARTIC_VALUE_TEXT = "q^8 - 2*q^4 + 2 - 2*q^-4 + q^-8"


def blown_up(m: int) -> list[tuple[int, int]]:
    return [(-2, 0), (0, -2)] + [(2, 2)] * m + [(-2, -2)] * (m - 1)


def blown_up_formula(m: int):
    """Closed triple sum for the blown-up plane, summed term by term."""
    total = ZERO
    for s_plus in range(2, m + 1):
        for s_minus in range(0, s_plus - 1):
            for k in range(1, s_plus - s_minus):
                sign = -1 if (m - s_plus + s_minus) % 2 else 1
                coeff = sign * comb(m, s_plus) * comb(m - 1, s_minus)
                e = 4 * s_plus - 4 * s_minus - 2 * k - 2
                # area_factor(4k) is q^(2k) - q^(-2k); half exponents are doubled
                total = total + monomial(coeff, 0) * area_factor(4 * k) * (monomial(1, 2 * e) + monomial(1, -2 * e))
    return total


def scan_interior(vertices, parity=None) -> int:
    """Interior lattice points of a convex CCW polygon by scanning its bounding box."""
    xs = [v[0] for v in vertices]
    ys = [v[1] for v in vertices]
    n = len(vertices)
    count = 0
    for x in range(min(xs), max(xs) + 1):
        for y in range(min(ys), max(ys) + 1):
            inside = True
            for i in range(n):
                ax, ay = vertices[i]
                bx, by = vertices[(i + 1) % n]
                if (bx - ax) * (y - ay) - (by - ay) * (x - ax) <= 0:
                    inside = False
                    break
            if inside and (parity is None or (x % 2, y % 2) == tuple(parity)):
                count += 1
    return count


@pytest.fixture
def quartic():
    return list(QUARTIC)


@pytest.fixture(scope="session")
def quartic_report():
    from troprefine import driver
    return driver.g1_report(QUARTIC, (0, 1), seed=1)


@pytest.fixture(scope="session")
def quartic_curve(quartic_report):
    (c,) = quartic_report.contributions
    return c.curve


@pytest.fixture(scope="session")
def oracle_families():
    """Brute-force elliptic curves for the quartic and both blown-up planes."""
    from troprefine import oracle
    return {name: oracle.g1_oracle_curves(deg, (0, 1), 1)[2]
            for name, deg in (("quartic", QUARTIC), ("m2", blown_up(2)), ("m3", blown_up(3)))}


# six-element degree whose walks use grafted subsets of two and three elements
GRAFT_DEGREE = [(-4, 2), (-4, 0), (4, 4), (4, 2), (-2, -2), (2, -6)]
GRAFT_PARITY = (1, 0)


@pytest.fixture(scope="session")
def graft_report():
    from troprefine import driver
    return driver.g1_report(GRAFT_DEGREE, GRAFT_PARITY, seed=1)


@pytest.fixture(scope="session")
def grafted_curves(graft_report):
    """(contribution, fragments, grafted curve) for every fragment choice of every walk."""
    from itertools import product

    from troprefine import driver
    out = []
    for c in graft_report.contributions:
        choices = driver.fragment_choices(graft_report.data, c.walk)
        keys = sorted(choices)
        for pick in product(*(choices[k] for k in keys)):
            fragments = dict(zip(keys, pick))
            out.append((c, fragments, driver.graft(c.curve, fragments)))
    return out


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
