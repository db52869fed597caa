import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dotchains.algebra import parse_structure
from dotchains.chains import (
    ChainSpec,
    Policy,
    count_chains,
    count_chains_brute,
    count_chains_dp,
    neighbor_counts,
    pair_count,
    pair_counts,
)
from dotchains.constructions import line_points
from dotchains.errors import BudgetExceeded, DotChainsError
from dotchains.pointsets import PointSet, sample_uniform, whole_space

STRUCTS = ["Fp:3", "Fp:5", "Z:3^2", "F:3^2"]


def naive_count(E, alphas, policy):
    """Plain enumeration of E^{k+1}; no pruning."""
    S = E.structure
    total = 0
    for tup in itertools.product(E.points, repeat=len(alphas) + 1):
        if any(S.dot(tup[j], tup[j + 1]) != a for j, a in enumerate(alphas)):
            continue
        if policy == "adjacent" and any(tup[j] == tup[j + 1] for j in range(len(alphas))):
            continue
        if policy == "pairwise" and len(set(tup)) != len(tup):
            continue
        total += 1
    return total


@st.composite
def instances(draw, max_n=6, max_k=3):
    lit = draw(st.sampled_from(STRUCTS))
    S = parse_structure(lit)
    d = draw(st.integers(1, 2))
    total = S.q**d
    idx = draw(st.sets(st.integers(0, total - 1), max_size=min(max_n, total)))
    pts = [tuple((i // S.q ** (d - 1 - c)) % S.q for c in range(d)) for i in idx]
    E = PointSet.build(S, d, pts)
    k = draw(st.integers(1, max_k))
    alphas = draw(st.lists(st.integers(0, S.q - 1), min_size=k, max_size=k))
    return E, alphas


def test_pair_count_full_space(full_F3_2):
    assert pair_count(full_F3_2, 1) == 24
    assert sum(pair_counts(full_F3_2)) == 81


def test_pair_count_small(three_points, F3):
    assert pair_count(three_points, 1) == 6
    assert pair_count(PointSet.build(F3, 2, []), 1) == 0


def test_neighbor_counts(full_F3_2, F3, Z9):
    assert neighbor_counts(full_F3_2, 1, [(1, 0)]) == {(1, 0): 3}
    assert neighbor_counts(full_F3_2, 2, [(0, 0)]) == {(0, 0): 0}
    L = PointSet.build(Z9, 2, line_points(Z9, (3, 2), 2).points)
    assert len(L) == 9
    assert neighbor_counts(L, 2, [(3, 2)]) == {(3, 2): 9}
    with pytest.raises(DotChainsError):
        neighbor_counts(full_F3_2, 1, whole_space(Z9, 2))


@given(instances(max_n=8, max_k=1))
@settings(max_examples=50, deadline=None)
def test_neighbor_counts_sum_to_pair_count(inst):
    E, (g,) = inst
    assert sum(neighbor_counts(E, g).values()) == pair_count(E, g)


def test_dp_examples(three_points, full_F3_2, F3):
    assert count_chains_dp(three_points, ChainSpec([1])).count == 6
    assert count_chains_dp(three_points, ChainSpec([1], "adjacent")).count == 4
    assert count_chains_dp(PointSet.build(F3, 2, [(0, 0)]), ChainSpec([0, 0])).count == 1
    rep = count_chains_dp(full_F3_2, ChainSpec([1, 1]))
    assert rep.count == 72 == naive_count(full_F3_2, [1, 1], "all")
    with pytest.raises(DotChainsError):
        count_chains_dp(full_F3_2, ChainSpec([1], "pairwise"))


def test_brute_examples(full_F3_2, F3):
    assert count_chains_brute(full_F3_2, ChainSpec([1], "pairwise")).count == 20
    axes = PointSet.build(F3, 2, [(x, 0) for x in range(3)] + [(0, y) for y in range(3)])
    assert count_chains_brute(axes, ChainSpec([0], "pairwise")).count >= 9


def test_brute_budget(full_F3_2):
    with pytest.raises(BudgetExceeded) as info:
        count_chains_brute(full_F3_2, ChainSpec([1, 1, 1]), budget=1000)
    assert info.value.required == 9**4


def test_report_fields(full_F3_2):
    rep = count_chains_dp(full_F3_2, ChainSpec([1]))
    assert rep.main_term == Fraction(27)
    assert rep.relative_error == Fraction(-1, 9)
    assert rep.policy is Policy.ALL
    assert rep.provenance["structure"] == "Fp:3"
    assert (rep.main_term * 3).denominator == 1
    empty = count_chains_dp(PointSet.build(full_F3_2.structure, 2, []), ChainSpec([1]))
    assert empty.count == 0 and empty.main_term == 0 and empty.relative_error == 0


def test_chainspec_validation(full_F3_2):
    with pytest.raises(DotChainsError):
        ChainSpec([])
    with pytest.raises(DotChainsError):
        ChainSpec([1], "sometimes")
    with pytest.raises(DotChainsError):
        count_chains_dp(full_F3_2, ChainSpec([3]))
    assert ChainSpec([1], "pairwise-distinct").policy is Policy.PAIRWISE


@given(instances())
@settings(max_examples=150, deadline=None)
def test_dp_brute_naive_agree(inst):
    E, alphas = inst
    for policy in ("all", "adjacent"):
        dp = count_chains_dp(E, ChainSpec(alphas, policy)).count
        assert dp == count_chains_brute(E, ChainSpec(alphas, policy)).count == naive_count(E, alphas, policy)
    assert count_chains(E, ChainSpec(alphas, "pairwise")).count == naive_count(E, alphas, "pairwise")


@given(instances())
@settings(max_examples=100, deadline=None)
def test_reversal_symmetry(inst):
    E, alphas = inst
    for policy in ("all", "adjacent", "pairwise"):
        fwd = count_chains(E, ChainSpec(alphas, policy)).count
        back = count_chains(E, ChainSpec(alphas[::-1], policy)).count
        assert fwd == back


@given(instances())
@settings(max_examples=100, deadline=None)
def test_policy_monotone(inst):
    E, alphas = inst
    a = count_chains(E, ChainSpec(alphas, "all")).count
    b = count_chains(E, ChainSpec(alphas, "adjacent")).count
    c = count_chains(E, ChainSpec(alphas, "pairwise")).count
    assert c <= b <= a


@given(instances(max_n=7), st.data())
@settings(max_examples=100, deadline=None)
def test_scaling_covariance(inst, data):
    E, alphas = inst
    S = E.structure
    c = data.draw(st.sampled_from(S.units()))
    cE = PointSet.build(S, E.d, [S.scale(c, x) for x in E.points])
    c2 = S.mul(c, c)
    scaled = [S.mul(c2, a) for a in alphas]
    assert count_chains_dp(E, ChainSpec(alphas)).count == count_chains_dp(cE, ChainSpec(scaled)).count


@pytest.mark.parametrize("seed", range(5))
def test_global_mass_q3(seed, F3):
    E = sample_uniform(F3, 2, 1 + seed, seed)
    for k in (1, 2):
        total = sum(count_chains_dp(E, ChainSpec(a)).count for a in itertools.product(range(3), repeat=k))
        assert total == len(E) ** (k + 1)


def test_big_counts_stay_exact():
    # the count exceeds int64, so the DP runs on Python integers
    S = parse_structure("Fp:3")
    E = whole_space(S, 6)
    rep = count_chains_dp(E, ChainSpec([0] * 8))
    # chains ending at the zero vector vs at a fixed nonzero vector:
    # 0 is orthogonal to all 729 points, a nonzero y to 0 and 242 nonzero points
    zero, nonzero = 1, 1
    for _ in range(8):
        zero, nonzero = zero + 728 * nonzero, zero + 242 * nonzero
    assert rep.count == zero + 728 * nonzero
    assert rep.count > 2**63
