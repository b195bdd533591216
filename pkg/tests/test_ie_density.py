import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from discordant.folner import GroupContext, density_report, residue_class
from discordant.ie_density import (
    IEFamily,
    ie_check_bounded_overcount,
    ie_check_independence,
    ie_partial_products,
    indicator_truncation_check,
    paired_series_limit,
    product_family,
    truncated_alternating_sum,
)

from oracles import count_multiples


def test_partial_products_example():
    trace = ie_partial_products([1 / 4, 1 / 9, 1 / 25])
    assert trace.prefix_products == pytest.approx([0.75, 0.6666667, 0.64], abs=1e-6)


def test_partial_product_interval_contains_limit():
    ds = [1 / p ** 2 for p in (2, 3, 5, 7, 11, 13)]
    tail = sum(1 / k ** 2 for k in range(14, 10 ** 6))
    lo, hi = ie_partial_products(ds, tail).interval()
    assert lo <= 6 / math.pi ** 2 <= hi


def test_partial_products_reject_full_density():
    with pytest.raises(ValueError):
        ie_partial_products([0.5, 1.0])


def test_family_requires_known_densities():
    from discordant.folner import SetOracle
    with pytest.raises(ValueError):
        IEFamily([SetOracle(contains=lambda x: True, label="x")], GroupContext.integers())


def test_avoid_all_density_matches_product():
    fam = IEFamily.multiples([4, 9, 25, 49])
    rep = density_report(fam.avoid_all(), fam.ctx, [10 ** 5])
    assert abs(rep.ratios[0][1] - ie_partial_products(fam.densities).last) < 1e-3


def test_independence_coprime_not_flagged():
    fam = IEFamily.multiples([2, 3, 5, 7])
    for I in [(0,), (0, 1), (1, 2, 3), (0, 1, 2, 3)]:
        assert not ie_check_independence(fam, I, 1000).flagged


def test_independence_common_factor_flagged():
    fam = IEFamily.multiples([2, 4])
    rep = ie_check_independence(fam, (0, 1), 1000)
    assert rep.flagged
    assert rep.ratio == pytest.approx(0.25, abs=1e-3)
    assert rep.product == pytest.approx(1 / 8)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(2, 30), min_size=2, max_size=4), st.integers(50, 3000))
def test_independence_against_lcm_count(moduli, n):
    fam = IEFamily.multiples(moduli)
    I = tuple(range(len(moduli)))
    rep = ie_check_independence(fam, I, n)
    L = math.lcm(*moduli)
    ratio = count_multiples(L, -n, n) / (2 * n + 1)
    product = 1 / math.prod(moduli)
    assert rep.ratio == pytest.approx(ratio)
    assert rep.flagged == (abs(ratio - product) > rep.tolerance)
    if all(math.gcd(a, b) == 1 for i, a in enumerate(moduli) for b in moduli[i + 1:]):
        assert not rep.flagged


def test_empty_beyond_support():
    assert IEFamily.multiples([2, 3, 5]).empty_beyond_support(3) == "verified"
    assert IEFamily.multiples([2, 3, 5]).empty_beyond_support(1) == "violated"
    fam = product_family(IEFamily.multiples([2]), IEFamily.multiples([2]))
    assert fam.empty_beyond_support(1) == "assumed"


def test_overcount_examples():
    fam = IEFamily.multiples([4, 9, 25, 49, 121])
    for k in (1, 2, 3):
        rep = ie_check_bounded_overcount(fam, k, 10 ** 5)
        assert rep.diff < 1e-3
    assert ie_check_bounded_overcount(fam, 9, 100).average == 0


def test_overcount_matches_direct_subset_sum():
    moduli = [2, 3, 5, 7]
    fam = IEFamily.multiples(moduli)
    n = 200
    xs = range(-n, n + 1)
    for k in (1, 2, 3):
        total = 0
        for x in xs:
            r = sum(1 for m in moduli if x % m == 0)
            total += math.comb(r, k)
        rep = ie_check_bounded_overcount(fam, k, n)
        assert rep.average == pytest.approx(total / len(xs))


def test_overcount_truncation_tail():
    fam = IEFamily.multiples([4, 9, 25, 49])
    rep = ie_check_bounded_overcount(fam, 2, 1000, truncation=2)
    assert rep.truncation == 2 and rep.tail_bound > 0
    full = ie_check_bounded_overcount(fam, 2, 1000)
    assert abs(full.density_sum - rep.density_sum) <= rep.tail_bound
    with pytest.raises(ValueError):
        ie_check_bounded_overcount(fam, 2, 10, truncation=9)


@pytest.mark.parametrize("r", range(0, 12))
@pytest.mark.parametrize("n", [1, 2, 3])
def test_truncated_alternating_sum_closed_form(r, n):
    f = truncated_alternating_sum(r, n)
    if r == 0:
        assert f == 1
    else:
        assert f == -math.comb(r - 1, 2 * n - 1)
        assert f <= 0


def test_indicator_truncation_on_window():
    fam = IEFamily.multiples([2, 3, 5, 7, 11, 13])
    for n in (1, 2, 3):
        assert indicator_truncation_check(fam, n, range(-3000, 3001))
    with pytest.raises(ValueError):
        indicator_truncation_check(fam, 0, [1])


def test_product_family_density():
    famG = IEFamily.multiples([2])
    fam = product_family(famG, famG)
    assert fam.ctx.rank == 2
    rep = ie_check_independence(fam, (0,), 500)
    assert rep.ratio == pytest.approx((501 / 1001) ** 2)
    assert abs(rep.ratio - 0.25) < 1e-3


def test_product_family_membership():
    fam = product_family(IEFamily.multiples([3, 5]), IEFamily([residue_class(2), residue_class(7)], GroupContext.integers()))
    m = fam.members[1]
    X = np.array([[5, 7], [5, 6], [10, 14], [3, 7]])
    assert m.mask(X).tolist() == [True, False, True, False]
    assert m.contains((10, -7)) and m.known_density == pytest.approx(1 / 35)


def test_product_family_length_mismatch():
    with pytest.raises(ValueError):
        product_family(IEFamily.multiples([2]), IEFamily.multiples([2, 3]))


def test_paired_series_limit():
    vals = paired_series_limit(lambda k, n: 2.0 ** -k * (1 + 1 / n), lambda k, n: 3.0 ** -k * (1 - 1 / n),
                               [10, 100, 10 ** 4, 10 ** 7])
    assert abs(vals[-1] - 0.2) < 1e-6
    errs = [abs(v - 0.2) for v in vals]
    assert errs == sorted(errs, reverse=True)
