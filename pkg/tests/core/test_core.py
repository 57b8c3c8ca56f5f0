# coding=utf-8

"""Unit tests for auctionlab/core.py."""

from collections import Counter
from fractions import Fraction
from math import factorial, sqrt

import pytest

from auctionlab.core import (
    AuctionParams,
    BidderType,
    Instance,
    Matching,
    Prediction,
    apply_matching,
    as_prediction,
    canonical_consistency_instance,
    canonical_robustness_instance,
    disjoint_intervals,
    distinct_orderings,
    emit_instance,
    has_distinct_values,
    in_w_n,
    load_instance,
    ordering_weight,
    parse_instance,
    perturb_distinct,
    random_matching,
    random_overlapping_instance,
    rng_for,
    sequential_instance,
)
from auctionlab.exceptions import AuctionLabInputException
from tests import JUNK_TEXT, PAYMENT_BIDDERS


def test_bidder_type__coerces_rationals():
    bidder = BidderType("1/2", 3, "0.6")
    assert bidder.arrival == Fraction(1, 2)
    assert bidder.departure == 3
    assert bidder.value == Fraction(3, 5)
    assert bidder.interval == (Fraction(1, 2), Fraction(3))


@pytest.mark.parametrize(
    "arrival, departure, value",
    [(2, 1, 5), (-1, 1, 5), (0, 1, -5), (0, 1, JUNK_TEXT)],
)
def test_bidder_type__invalid(arrival, departure, value):
    with pytest.raises(AuctionLabInputException):
        BidderType(arrival, departure, value)


def test_bidder_type__active_at():
    bidder = BidderType(1, 3, 5)
    assert bidder.active_at(1)
    assert bidder.active_at(3)
    assert not bidder.active_at(Fraction(7, 2))


def test_instance__default_tie_break():
    instance = Instance(PAYMENT_BIDDERS)
    assert instance.tie_break == (0, 1, 2, 3)
    assert instance.rank == (0, 1, 2, 3)
    assert instance.n == len(instance) == 4
    assert instance.values == (9, 3, 5, 2)
    assert instance[0] == BidderType(0, 10, 9)


def test_instance__rank_inverts_tie_break():
    instance = Instance(((0, 1, 1), (0, 1, 2), (0, 1, 3)), (2, 0, 1))
    assert instance.rank == (1, 2, 0)


@pytest.mark.parametrize("tie_break", [(0, 0, 1), (0, 1), (1, 2, 3)])
def test_instance__invalid_tie_break(tie_break):
    with pytest.raises(AuctionLabInputException):
        Instance(((0, 1, 1), (0, 1, 2), (0, 1, 3)), tie_break)


def test_instance__empty():
    with pytest.raises(AuctionLabInputException):
        Instance(())


def test_instance__distinct_flag():
    with pytest.raises(AuctionLabInputException):
        Instance(((0, 1, 2), (1, 2, 2)), distinct=True)
    assert Instance(((0, 1, 2), (1, 2, 3)), distinct=True).distinct


def test_auction_params__coerces():
    params = AuctionParams("3/5", "0.5")
    assert params.alpha == Fraction(3, 5)
    assert params.gamma == Fraction(1, 2)


@pytest.mark.parametrize(
    "alpha, gamma", [(Fraction(-1, 5), 1), (Fraction(6, 5), 1), (0, 2)]
)
def test_auction_params__out_of_range(alpha, gamma):
    with pytest.raises(AuctionLabInputException):
        AuctionParams(alpha, gamma)


def test_auction_params__strict_wn():
    AuctionParams(Fraction(3, 5), n=10, strict_wn=True)
    with pytest.raises(AuctionLabInputException):
        AuctionParams(Fraction(1, 2), n=10, strict_wn=True)
    AuctionParams(Fraction(1, 2), n=10)


def test_prediction__negative():
    with pytest.raises(AuctionLabInputException):
        Prediction(-1)


def test_as_prediction():
    prediction = Prediction(3)
    assert as_prediction(prediction) is prediction
    assert as_prediction("7/2").value == Fraction(7, 2)


@pytest.mark.parametrize(
    "n, alpha, expected",
    [
        (10, Fraction(3, 5), True),
        (10, Fraction(1, 2), False),
        (10, Fraction(0), True),
        (4, Fraction(1, 2), True),
        (5, Fraction(1, 2), False),
    ],
)
def test_in_w_n(n, alpha, expected):
    assert in_w_n(n, alpha) is expected


def test_has_distinct_values():
    assert has_distinct_values([1, 2, 3])
    assert not has_distinct_values([1, 2, 1])


def test_rng_for__deterministic():
    first = rng_for(7, 1).permutation(10)
    second = rng_for(7, 1).permutation(10)
    assert list(first) == list(second)


def test_rng_for__streams_differ():
    draws = {tuple(rng_for(7, t).permutation(10)) for t in range(5)}
    assert len(draws) > 1


def test_matching__bijection():
    assert Matching((2, 0, 1)).assignment == (2, 0, 1)
    with pytest.raises(AuctionLabInputException):
        Matching((0, 0, 1))


def test_apply_matching():
    instance = apply_matching([1, 2, 3], disjoint_intervals(3), (2, 0, 1))
    assert instance.values == (2, 3, 1)
    assert instance.intervals == ((1, 1), (2, 2), (3, 3))
    assert instance.distinct


def test_apply_matching__size_mismatch():
    with pytest.raises(AuctionLabInputException):
        apply_matching([1, 2], disjoint_intervals(3), (0, 1))


def test_random_matching__deterministic():
    values = [5, 4, 3, 2, 1]
    first = random_matching(values, disjoint_intervals(5), seed=3)
    second = random_matching(values, disjoint_intervals(5), seed=3)
    assert first == second
    assert sorted(first.values) == [1, 2, 3, 4, 5]


@pytest.mark.parametrize("n", [2, 3, 4])
def test_random_matching__covers_all_assignments(n):
    values = list(range(1, n + 1))
    seen = {
        random_matching(values, disjoint_intervals(n), seed).values
        for seed in range(400)
    }
    assert len(seen) == factorial(n)


@pytest.mark.slow
def test_random_matching__uniform():
    trials = 30000
    counts = Counter(
        random_matching([1, 2, 3], disjoint_intervals(3), seed).values
        for seed in range(trials)
    )
    assert len(counts) == 6
    p = 1 / 6
    sigma = sqrt(trials * p * (1 - p))
    for count in counts.values():
        assert abs(count - trials * p) <= 3 * sigma


def test_sequential_instance():
    instance = sequential_instance([3, 7, 5, 2])
    assert instance.intervals == ((1, 1), (2, 2), (3, 3), (4, 4))
    assert instance.values == (3, 7, 5, 2)


def test_sequential_instance__empty():
    with pytest.raises(AuctionLabInputException):
        sequential_instance([])


def test_canonical_consistency_instance():
    values, prediction = canonical_consistency_instance(4)
    assert values == [1, 0, 0, 0]
    assert prediction.value == 1


def test_canonical_robustness_instance():
    values, scenarios = canonical_robustness_instance(4, Fraction(1, 2))
    assert values == [1, Fraction(1, 2), 0, 0]
    assert [s.value for s in scenarios] == [2, Fraction(1, 4), Fraction(3, 4)]


@pytest.mark.parametrize("eps", [0, 1, Fraction(3, 2)])
def test_canonical_robustness_instance__eps(eps):
    with pytest.raises(AuctionLabInputException):
        canonical_robustness_instance(4, eps)


def test_perturb_distinct():
    assert perturb_distinct([1, 1, 2]) == [1, Fraction(5, 4), 2]
    assert has_distinct_values(perturb_distinct([0, 0, 0, 1]))


def test_perturb_distinct__preserves_order():
    values = [3, 1, 3, 2, 1]
    perturbed = perturb_distinct(values)
    for a, b, pa, pb in zip(values, values[1:], perturbed, perturbed[1:]):
        if a != b:
            assert (a < b) == (pa < pb)


def test_ordering_weight():
    assert ordering_weight([0, 0, 0, 1]) == 6
    assert ordering_weight([1, 2, 3]) == 1


def test_distinct_orderings():
    orderings = list(distinct_orderings([0, 1, 0]))
    assert orderings == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]


def test_distinct_orderings__counts():
    # 5! / (2! 3!)
    assert len(list(distinct_orderings([1, 1, 0, 0, 0]))) == 10


def test_random_overlapping_instance():
    instance = random_overlapping_instance(5, seed=11)
    assert instance == random_overlapping_instance(5, seed=11)
    assert instance.distinct
    assert sorted(instance.tie_break) == list(range(5))
    assert all(b.value.denominator == 1 for b in instance.bidders)


def test_parse_instance():
    text = (
        '{"bidders": [{"arrival": "0", "departure": "10", "value": "9"},'
        ' {"arrival": 1, "departure": 2, "value": "3/2"}], "tie_break": [1, 0]}'
    )
    instance = parse_instance(text)
    assert instance.values == (9, Fraction(3, 2))
    assert instance.tie_break == (1, 0)


def test_emit_instance__parses_back():
    instance = Instance(((0, "1/2", "7/3"), (1, 2, 3)), (1, 0))
    assert parse_instance(emit_instance(instance)) == instance


@pytest.mark.parametrize(
    "text",
    [JUNK_TEXT, "[]", '{"bidders": [{"arrival": 0}]}', '{"tie_break": []}'],
)
def test_parse_instance__malformed(text):
    with pytest.raises(AuctionLabInputException):
        parse_instance(text)


def test_load_instance(instance_file):
    assert load_instance(instance_file).values == (9, 3, 5, 2)


def test_load_instance__missing(tmp_path):
    with pytest.raises(AuctionLabInputException):
        load_instance(str(tmp_path / "missing.json"))
