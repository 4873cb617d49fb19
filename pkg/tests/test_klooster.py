import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kloostpath.errors import NotAUnit, UnsupportedDepth, UsageError
from kloostpath.klooster import (KloostermanValue, evaluate,
                                 kloosterman_closed, kloosterman_closed_array,
                                 kloosterman_naive, multiplicity_check,
                                 naive_table, summand_census)
from kloostpath.modring import PrimePowerModulus, SqrtBranch


def direct(p, n, a, b):
    """Independent scalar oracle: the defining sum with Python integers."""
    q = p**n
    s = sum(cmath.exp(2j * math.pi * (a * x + b * pow(x, -1, q)) / q)
            for x in range(1, q) if x % p)
    return s / math.sqrt(q)


def test_naive_examples():
    assert abs(kloosterman_naive(PrimePowerModulus(3, 1), 1, 1) - (-1 / math.sqrt(3))) < 1e-12
    v = kloosterman_naive(PrimePowerModulus(3, 2), 1, 1)
    assert abs(v - 2 * math.cos(4 * math.pi / 9)) < 1e-12
    assert abs(v.real - 0.347296) < 1e-6
    assert abs(v.imag) < 1e-12
    assert abs(kloosterman_naive(PrimePowerModulus(5, 2), 2, 1)) < 1e-12


def test_naive_matches_scalar_oracle():
    for p, n, a, b in [(3, 3, 2, 5), (5, 2, 7, 3), (7, 2, 0, 1), (11, 1, 3, 4)]:
        assert abs(kloosterman_naive(PrimePowerModulus(p, n), a, b) - direct(p, n, a, b)) < 1e-10


def test_naive_requires_unit_b():
    with pytest.raises(NotAUnit):
        kloosterman_naive(PrimePowerModulus(3, 2), 1, 3)


def test_closed_examples():
    m = PrimePowerModulus(3, 2)
    assert abs(kloosterman_closed(m, 1, 1) - 2 * math.cos(2 * math.pi * 2 / 9)) < 1e-12
    assert kloosterman_closed(m, 2, 1) == 0.0
    m3 = PrimePowerModulus(3, 3)
    v = kloosterman_closed(m3, 1, 1)
    assert abs(v) <= 2
    assert abs(v - kloosterman_naive(m3, 1, 1).real) < 1e-9


def test_closed_rejects_depth_one():
    with pytest.raises(UnsupportedDepth):
        kloosterman_closed(PrimePowerModulus(5, 1), 1, 1)


@pytest.mark.parametrize("p", [3, 5, 7])
@pytest.mark.parametrize("n", [2, 3, 4])
def test_closed_vs_naive_all_pairs(p, n):
    m = PrimePowerModulus(p, n)
    units = m.units()
    # every unit pair; Kl(a, b) depends only on ab, but evaluate both sides per pair
    a, b = np.meshgrid(units, units)
    a, b = a.ravel(), b.ravel()
    closed = kloosterman_closed_array(m, a * b % m.q)
    table = naive_table(m)
    assert np.abs(table.imag).max() < 1e-8
    assert np.abs(closed - table[a * b % m.q].real).max() < 1e-8
    for i in range(0, len(a), max(1, len(a) // 25)):
        v = kloosterman_naive(m, int(a[i]), int(b[i]))
        assert abs(v.real - closed[i]) < 1e-8 and abs(v.imag) < 1e-8
        assert abs(kloosterman_closed(m, int(a[i]), int(b[i])) - closed[i]) < 1e-12


def test_vanishing_is_exact():
    m = PrimePowerModulus(7, 3)
    c = m.units()
    vals = kloosterman_closed_array(m, c)
    assert np.all(vals[m.legendre_array(c) == -1] == 0.0)


@pytest.mark.parametrize("p,n", [(3, 3), (5, 2), (7, 3), (13, 2)])
def test_branch_independence(p, n):
    m = PrimePowerModulus(p, n)
    br = SqrtBranch(m)
    c = m.units()
    assert np.abs(kloosterman_closed_array(m, c, br) - kloosterman_closed_array(m, c, br.flipped())).max() < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([(3, 2), (3, 4), (5, 3), (7, 2)]), st.integers(1, 10**6), st.integers(1, 10**6))
def test_symmetry_and_bound(pn, a, b):
    m = PrimePowerModulus(*pn)
    a = a if a % m.p else a + 1
    b = b if b % m.p else b + 1
    ab = kloosterman_naive(m, a, b)
    assert abs(ab - kloosterman_naive(m, b, a)) < 1e-9
    assert abs(ab) <= 2 + 1e-9


def test_value_type_checks_bound():
    with pytest.raises(ArithmeticError):
        KloostermanValue(2.5, "closed")
    assert evaluate(PrimePowerModulus(5, 1), 1, 1).method == "naive"
    assert evaluate(PrimePowerModulus(5, 2), 1, 1).method == "closed"
    with pytest.raises(UsageError):
        evaluate(PrimePowerModulus(5, 2), 1, 1, method="fast")


def test_census_examples():
    c = summand_census(PrimePowerModulus(3, 3), 1, 1)
    assert c.distinct == 4
    c2 = summand_census(PrimePowerModulus(3, 2), 1, 1)
    # x + xbar mod 9 for x in 1, 2, 4, 5, 7, 8 gives 2, 7, 2, 7, 2, 7
    assert c2.counts == {2: 3, 7: 3} and c2.distinct == 2
    for p, n, a, b in [(5, 3, 2, 3), (7, 2, 1, 6)]:
        m = PrimePowerModulus(p, n)
        assert sum(summand_census(m, a, b).counts.values()) == m.phi


def test_census_four_summands_are_conjugate_pairs():
    c = summand_census(PrimePowerModulus(3, 3), 1, 1)
    assert {(-u) % 27 for u in c.counts} == set(c.counts)


def test_multiplicity_examples():
    from collections import Counter

    m = PrimePowerModulus(3, 5)
    x = [v for v in range(1, 243) if v % 3]
    counts = Counter((v + pow(v, -1, 243)) % 243 for v in x)
    assert counts[11] == 6
    assert counts[1] in (0, 2)
    m5 = PrimePowerModulus(5, 5)
    x5 = [v for v in range(1, 3125) if v % 5]
    c5 = Counter((v + pow(v, -1, 3125)) % 3125 for v in x5)
    assert c5[(-2 + 625 * 1) % 3125] == 50


@pytest.mark.parametrize("p,n,kappa", [(3, 5, 1), (3, 7, 2), (5, 5, 1), (5, 5, 2), (7, 5, 2)])
def test_multiplicity_refined_law(p, n, kappa):
    report = multiplicity_check(PrimePowerModulus(p, n), kappa, refined=True)
    assert report.passed, report.counterexamples[:5]


def test_multiplicity_unrefined_fails_exactly_on_nonsquare_classes():
    m = PrimePowerModulus(3, 5)
    report = multiplicity_check(m, 1)
    assert not report.passed
    assert all(got == 0 for _, got, _ in report.counterexamples)
    assert len(report.counterexamples) == report.checked // 2


def test_multiplicity_kappa_range():
    with pytest.raises(UsageError):
        multiplicity_check(PrimePowerModulus(3, 4), 2)
    with pytest.raises(UsageError):
        multiplicity_check(PrimePowerModulus(3, 4), 0)
