import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from discordant.constructions import (
    BSequence,
    StrausParams,
    coprime_pairs,
    heisenberg_bfree_oracle,
    squarefree,
    straus_set,
)
from discordant.detectors import (
    crt,
    crt_witness,
    duality_check,
    find_translate,
    longest_run,
    partition_experiment,
    preimage_mask,
    ps_evidence,
    st_decompose,
    syndeticity_check,
    thickness_profile,
    verify_failure,
    verify_thickness_witness,
)
from discordant.errors import ConfigurationError, ConstructionError
from discordant.folner import GroupContext, SetOracle, empty, evens, residue_class, whole

import oracles

NAT = GroupContext.nat()
Z = GroupContext.integers()
Z2 = GroupContext.lattice(2)
H3 = GroupContext.heisenberg()
Q = squarefree()


def factorial_blocks(limit=10):
    """Union of [k!, k! + k] for k <= limit, a thick set of zero density."""
    blocks = [(math.factorial(k), math.factorial(k) + k) for k in range(1, limit + 1)]

    def contains(x):
        return any(a <= x <= b for a, b in blocks)

    def batch(X):
        out = np.zeros(len(X), dtype=bool)
        for a, b in blocks:
            out |= (X >= a) & (X <= b)
        return out

    return SetOracle(contains=contains, label="factorial blocks", batch=batch)


def test_longest_run():
    assert longest_run(np.array([0, 1, 1, 0, 1, 1, 1, 0], dtype=bool)) == (3, 4)
    assert longest_run(np.zeros(5, dtype=bool)) == (0, -1)
    assert longest_run(np.ones(4, dtype=bool)) == (4, 0)


def test_non_squarefree_runs():
    p = thickness_profile(~Q, NAT, 10 ** 4)
    assert (p.max_shape_index, p.witness) == (5, 844)
    p = thickness_profile(~Q, NAT, 843)
    assert (p.max_shape_index, p.witness) == (4, 242)
    assert verify_thickness_witness(~Q, NAT, p)


def test_runs_against_trial_division():
    flags = [not oracles.is_squarefree(x) for x in range(1, 2001)]
    best, start, cur = 0, None, 0
    for i, f in enumerate(flags, start=1):
        cur = cur + 1 if f else 0
        if cur > best:
            best, start = cur, i - cur + 1
    p = thickness_profile(~Q, NAT, 2000)
    assert (p.max_shape_index, p.witness) == (best, start)


def test_thickness_trivial_sets():
    assert thickness_profile(evens(), Z, 100).max_shape_index == 1
    assert thickness_profile(empty(), Z, 100).max_shape_index == 0
    assert thickness_profile(empty(), Z, 100).witness is None
    p = thickness_profile(whole(), Z2, 200)
    assert p.saturated and verify_thickness_witness(whole(), Z2, p)


def test_thickness_lattice_and_heisenberg():
    # any 2x2 block of pairs contains an even-even pair
    p = thickness_profile(coprime_pairs(100), Z2, 10 ** 4)
    assert p.max_shape_index == 1
    A = heisenberg_bfree_oracle(BSequence((2, 3)))
    p = thickness_profile(A, H3, 2000)
    assert p.max_shape_index >= 1 and verify_thickness_witness(A, H3, p)


def test_thickness_needs_windows():
    with pytest.raises(ConfigurationError):
        thickness_profile(whole(), GroupContext.free_words("ab"), 10)
    with pytest.raises(ConfigurationError):
        thickness_profile(evens(), Z2, 100)


def test_factorial_blocks_are_thick():
    A = factorial_blocks()
    grows = [thickness_profile(A, NAT, b).max_shape_index for b in (10, 10 ** 3, 10 ** 5, 10 ** 6)]
    assert grows == [4, 7, 9, 10]
    ev = ps_evidence(A, NAT, [range(1)], 10 ** 6)[0]
    assert ev.grade == "growing"


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 12), st.integers(0, 11), st.integers(10, 2000), st.integers(10, 2000))
def test_thickness_monotone_in_budget_and_set(m, r, b1, b2):
    A = residue_class(m, r) | residue_class(m, (r + 1) % m)
    lo, hi = sorted((b1, b2))
    assert thickness_profile(A, Z, lo).max_shape_index <= thickness_profile(A, Z, hi).max_shape_index
    assert thickness_profile(residue_class(m, r), Z, hi).max_shape_index <= thickness_profile(A, Z, hi).max_shape_index


def test_squarefree_not_syndetic_for_four_shifts():
    cert = syndeticity_check(Q, NAT, range(4), 300)
    assert cert.failure_witness == 242 and not cert.covered
    assert verify_failure(Q, NAT, cert)
    assert all(not oracles.is_squarefree(242 + h) for h in range(4))
    assert syndeticity_check(Q, NAT, range(4), 241).covered


def test_syndeticity_covered():
    assert syndeticity_check(evens(), Z, (0, 1), 1000).covered
    assert syndeticity_check(evens(), Z, (0,), 10).failure_witness == -9
    cert = syndeticity_check(coprime_pairs(100), Z2, [(0, 0), (1, 0)], 5)
    assert verify_failure(coprime_pairs(100), Z2, cert)


def test_preimage_mask_against_definition():
    H = (0, 2, 5)
    m = preimage_mask(Q, H, -50, 50)
    assert m.tolist() == [any(oracles.is_squarefree(x + h) for h in H) for x in range(-50, 51)]


def test_ps_evidence_straus():
    A = straus_set(StrausParams.powers_of_two(10 ** 5))
    ev = ps_evidence(A, NAT, [range(5)], 10 ** 5)[0]
    assert ev.grade == "stalled"
    assert [s for _, s in ev.ladder] == [127] * 4


def test_ps_evidence_grades():
    assert ps_evidence(evens(), Z, [(0, 1)], 10 ** 4)[0].grade == "unbounded"
    assert ps_evidence(Q, NAT, [(0,)], 10 ** 5)[0].grade == "stalled"
    with pytest.raises(ValueError):
        ps_evidence(Q, NAT, [], 100)


def test_crt_examples():
    assert crt([0, 8, 23], [4, 9, 25]) == (548, 900)
    w = crt_witness([0, 1, 2], [4, 9, 25], oracle=Q)
    assert (w.x, w.N) == (548, 900)
    assert w.verified_range == (0, 10)
    assert all(p["value_mod"] == p["residue"] for p in w.residue_proof)
    assert crt_witness([0, 1], [4, 9]).to_json()["x"] == 8
    assert crt_witness([0], [4]).x == 0


def test_crt_witness_rejects():
    with pytest.raises(ValueError):
        crt_witness([0, 1], [4, 6])
    with pytest.raises(ValueError):
        crt_witness([0, 1, 2], [4, 9])
    with pytest.raises(ConstructionError):
        crt_witness([0, 1], [4, 9], residues=[1, 1], oracle=Q)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from([4, 9, 25, 49, 11, 13, 8, 27]), min_size=1, max_size=3, unique=True),
       st.data())
def test_crt_against_scan(moduli, data):
    mods = []
    for m in moduli:
        if all(math.gcd(m, k) == 1 for k in mods):
            mods.append(m)
    F = data.draw(st.lists(st.integers(-30, 30), min_size=len(mods), max_size=len(mods)))
    res = [data.draw(st.integers(0, m - 1)) for m in mods]
    w = crt_witness(F, mods, residues=res)
    assert (w.x, w.N) == oracles.crt_scan(F, mods, res)


def test_crt_with_squares_leaves_squarefree():
    w = crt_witness([0, 1, 2, 3], [4, 9, 25, 49], oracle=Q, ks=range(0, 50))
    for k in range(50):
        assert all(not oracles.is_squarefree(w.x + f + k * w.N) for f in range(4))


def test_st_decomposition():
    d = st_decompose(Q, NAT, range(3), 500)
    xs = np.arange(1, 501)
    assert np.array_equal((d.S & d.T).mask(xs), Q.mask(xs))
    # T contains A's preimage, so it is syndetic with the smaller H
    assert syndeticity_check(d.T, NAT, range(3), 500).covered


def test_duality_pairs_failures_with_translates():
    rows = duality_check(Q, NAT, [range(2), range(4)], 300)
    assert [r.failure for r in rows] == [8, 242]
    assert all(r.consistent for r in rows)
    assert find_translate(~Q, NAT, range(4), 300) == 242
    # evens: the complement only fits single points
    rows = duality_check(evens(), Z, [(0,), (0, 1)], 50)
    assert rows[0].failure == rows[0].complement_translate == -49
    assert rows[1].failure is None and rows[1].complement_translate is None


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 9), st.lists(st.integers(0, 8), min_size=1, max_size=4, unique=True),
       st.lists(st.integers(0, 6), min_size=1, max_size=3, unique=True))
def test_duality_property(m, rs, H):
    A = residue_class(m, rs[0])
    for r in rs[1:]:
        A = A | residue_class(m, r)
    row = duality_check(A, Z, [H], 60)[0]
    assert row.consistent


def test_partition_experiment():
    rep = partition_experiment(~Q, NAT, lambda x: 1 if x % 3 == 0 else 2, 2, [range(1), range(3)], 10 ** 4)
    assert rep.strongest in (1, 2)
    assert len(rep.classes) == 2 and all(len(c) == 2 for c in rep.classes)
    # each class is contained in the original set
    total = [ps_evidence(~Q, NAT, [range(3)], 10 ** 4)[0].ladder[-1][1]]
    assert all(c[1].ladder[-1][1] <= total[0] for c in rep.classes)
