# coding=utf-8

"""Unit tests for auctionlab/engine.py."""

import json
from fractions import Fraction

import pytest

from auctionlab.core import (
    AuctionParams,
    BidderType,
    Instance,
    random_overlapping_instance,
    sequential_instance,
)
from auctionlab.engine import (
    ARRIVAL,
    CLINCH,
    DEPARTURE,
    THRESHOLD_UPDATE,
    PhaseMilestones,
    alloc,
    alloc_literal,
    departure_index,
    event_schedule,
    milestones,
    payment,
    phase_threshold,
    reported_instance,
    run,
    run_with_reports,
)
from auctionlab.exceptions import AuctionLabInputException
from auctionlab.utils import INFINITY
from tests import (
    MILESTONES,
    PAYMENT_PREDICTION,
    SEQUENTIAL_VALUES,
    TIE_BREAK_ALPHA,
    TIE_BREAK_PREDICTION,
)


@pytest.mark.parametrize("n, alpha, i1, i2", MILESTONES)
def test_milestones(n, alpha, i1, i2):
    assert milestones(n, alpha) == PhaseMilestones(i1, i2)


@pytest.mark.parametrize("n, alpha", [(0, Fraction(1, 2)), (4, Fraction(3, 2))])
def test_milestones__invalid(n, alpha):
    with pytest.raises(AuctionLabInputException):
        milestones(n, alpha)


def test_milestones__second_not_before_first():
    for n in range(1, 12):
        for k in range(0, 11):
            counts = milestones(n, Fraction(k, 10))
            assert 0 <= counts.i1_count <= counts.i2_count <= n


def test_phase_threshold():
    counts = PhaseMilestones(1, 3)
    assert phase_threshold(0, 0, counts, 8) == INFINITY
    assert phase_threshold(1, 3, counts, 8) == 8
    assert phase_threshold(2, 9, counts, 8) == 9
    assert phase_threshold(3, 5, counts, 8) == 5


def test_event_schedule__arrivals_first():
    instance = Instance(((0, 2, 1), (2, 3, 1)))
    assert [(t, k, b) for t, k, b in event_schedule(instance)] == [
        (0, ARRIVAL, 0),
        (2, ARRIVAL, 1),
        (2, DEPARTURE, 0),
        (3, DEPARTURE, 1),
    ]


def test_event_schedule__tie_break_orders_simultaneous_events():
    instance = Instance(((0, 5, 1), (0, 5, 2)), (1, 0))
    kinds = [(k, b) for _, k, b in event_schedule(instance)]
    assert kinds == [
        (ARRIVAL, 1),
        (ARRIVAL, 0),
        (DEPARTURE, 1),
        (DEPARTURE, 0),
    ]


def test_departure_index(payment_instance):
    assert departure_index(payment_instance, 0) == 4
    assert departure_index(payment_instance, 1) == 1
    with pytest.raises(AuctionLabInputException):
        departure_index(payment_instance, 9)


def test_alloc__clinch_in_second_phase(payment_instance, payment_params):
    result = alloc(payment_instance, payment_params, PAYMENT_PREDICTION)
    assert result.winner == 0
    assert result.threshold == 8
    assert result.phase == 2
    assert result.active_winner
    assert result.clinch_time == 2
    assert result.transition_v_max == 3


def test_alloc__trace(payment_instance, payment_params):
    result = alloc(payment_instance, payment_params, PAYMENT_PREDICTION)
    kinds = [e.kind for e in result.trace]
    assert kinds == [
        ARRIVAL,
        ARRIVAL,
        DEPARTURE,
        THRESHOLD_UPDATE,
        CLINCH,
    ]
    update = result.trace.of_kind(THRESHOLD_UPDATE)[0]
    assert update.tau_before == INFINITY
    assert update.tau_after == 8


def test_alloc__no_trace(payment_instance, payment_params):
    result = alloc(
        payment_instance, payment_params, PAYMENT_PREDICTION, record=False
    )
    assert result.trace is None


def test_trace__json_lines(payment_instance, payment_params):
    result = alloc(payment_instance, payment_params, PAYMENT_PREDICTION)
    lines = [json.loads(l) for l in result.trace.to_json_lines().splitlines()]
    assert lines[0]["tau_before"] == "inf"
    assert lines[3]["tau_after"] == "8/1"
    assert lines[-1]["kind"] == CLINCH
    assert lines[-1]["bidder"] == 0


@pytest.mark.parametrize(
    "prediction, winner, price",
    [(7, 1, 7), (4, 1, 4), (100, None, None)],
)
def test_run__sequential(prediction, winner, price):
    instance = sequential_instance(SEQUENTIAL_VALUES)
    outcome = run(instance, AuctionParams(Fraction(1, 2)), prediction)
    assert outcome.winner == winner
    if winner is None:
        assert not outcome.sold
        assert outcome.revenue == 0
        assert outcome.threshold == 7
    else:
        assert outcome.price == price
        assert outcome.welfare == 7


def test_alloc__clinch_on_arrival():
    instance = sequential_instance(SEQUENTIAL_VALUES)
    result = alloc(instance, AuctionParams(Fraction(1, 2)), 7)
    assert result.winner == 1
    assert not result.active_winner
    assert result.clinch_time == 2


def test_alloc__alpha_one_opens_second_phase_immediately():
    instance = sequential_instance([1, 2, 3])
    result = alloc(instance, AuctionParams(1), 2)
    assert result.winner == 1
    assert result.phase == 2
    assert result.transition_v_max == 0


def test_alloc__exclude_keeps_counts(payment_instance, payment_params):
    result = alloc(
        payment_instance, payment_params, PAYMENT_PREDICTION, exclude=0
    )
    assert result.winner is None
    assert result.threshold == 5


def test_alloc_literal__matches_recompute(payment_instance, payment_params):
    for prediction in (0, 2, 4, 8, 9, 12):
        literal = alloc_literal(
            payment_instance, payment_params, prediction, record=False
        )
        recompute = alloc(
            payment_instance, payment_params, prediction, record=False
        )
        assert literal.winner == recompute.winner
        assert literal.threshold == recompute.threshold


def test_payment__rerun(payment_instance, payment_params):
    result = alloc(payment_instance, payment_params, PAYMENT_PREDICTION)
    assert payment(payment_instance, payment_params, PAYMENT_PREDICTION, result) == 5


def test_payment__no_rerun(payment_instance, payment_params):
    result = alloc(payment_instance, payment_params, PAYMENT_PREDICTION)
    price = payment(
        payment_instance, payment_params, PAYMENT_PREDICTION, result, rerun=False
    )
    assert price == 8


def test_payment__early_departure_keeps_threshold():
    instance = Instance(((0, 3, 9), (1, 2, 3), (3, 4, 5), (5, 6, 2)))
    params = AuctionParams(Fraction(1, 2))
    result = alloc(instance, params, PAYMENT_PREDICTION)
    assert result.winner == 0
    assert departure_index(instance, 0) == 2
    assert payment(instance, params, PAYMENT_PREDICTION, result) == 8


def test_payment__unsold(sequential, payment_params):
    result = alloc(sequential, payment_params, 100)
    assert result.winner is None
    with pytest.raises(AuctionLabInputException):
        payment(sequential, payment_params, 100, result)


def test_payment__tie_break_rule(tie_break_instance):
    params = AuctionParams(TIE_BREAK_ALPHA)
    reports = list(tie_break_instance.bidders)
    reports[4] = BidderType(0, 20, 8)
    reported = reported_instance(tie_break_instance, reports)
    result = alloc(reported, params, TIE_BREAK_PREDICTION)
    assert result.winner == 4
    assert result.phase == 2
    kept = payment(reported, params, TIE_BREAK_PREDICTION, result)
    dropped = payment(
        reported, params, TIE_BREAK_PREDICTION, result, tie_break_rule=False
    )
    assert kept == 8
    assert dropped == 5


def test_run__truthful_tie_break_winner(tie_break_instance):
    outcome = run(tie_break_instance, AuctionParams(TIE_BREAK_ALPHA), 8)
    assert outcome.winner == 5
    assert outcome.price == 5


def test_run__price_never_exceeds_value(payment_instance, payment_params):
    for prediction in range(0, 12):
        outcome = run(payment_instance, payment_params, prediction)
        if outcome.sold:
            assert outcome.price <= payment_instance[outcome.winner].value


def test_run__literal(payment_instance, payment_params):
    outcome = run(payment_instance, payment_params, 8, literal=True)
    assert outcome.winner == 0
    assert outcome.price == 5


def test_run_with_reports__late_departure_loses_value(
    payment_instance, payment_params
):
    reports = list(payment_instance.bidders)
    reports[1] = BidderType(1, 12, 9)
    outcome = run_with_reports(
        payment_instance, reports, payment_params, PAYMENT_PREDICTION
    )
    assert outcome.winner == 0
    assert outcome.utilities[1] == 0


def test_run_with_reports__utilities(payment_instance, payment_params):
    outcome = run_with_reports(
        payment_instance,
        list(payment_instance.bidders),
        payment_params,
        PAYMENT_PREDICTION,
    )
    assert outcome.utilities == (4, 0, 0, 0)
    assert outcome.welfare == 9


def test_reported_instance__early_arrival(payment_instance):
    reports = list(payment_instance.bidders)
    reports[1] = BidderType(0, 2, 3)
    with pytest.raises(AuctionLabInputException):
        reported_instance(payment_instance, reports)


def test_reported_instance__keeps_tie_break(tie_break_instance):
    reported = reported_instance(
        tie_break_instance, list(tie_break_instance.bidders)
    )
    assert reported.tie_break == tie_break_instance.tie_break


def test_reported_instance__report_count(payment_instance):
    reports = list(payment_instance.bidders)
    with pytest.raises(AuctionLabInputException):
        reported_instance(payment_instance, reports[:2])


HALF = Fraction(1, 2)
RANDOM_PARAMS = [AuctionParams(HALF), AuctionParams(HALF, HALF)]


def _random_instance(seed):
    # n in 3..6 keeps 1 <= i1_count < i2_count at alpha=1/2
    return random_overlapping_instance(3 + seed % 4, seed)


def _predictions(instance):
    values = sorted(set(instance.values))
    return [0, values[0], values[len(values) // 2], values[-1], values[-1] + 1]


def _truncated(instance, horizon):
    """Drops every bidder arriving after `horizon`, keeping the tie-break order."""
    kept = [b for b in range(instance.n) if instance[b].arrival <= horizon]
    index = {b: i for i, b in enumerate(kept)}
    truncated = Instance(
        tuple(instance[b] for b in kept),
        tuple(index[b] for b in instance.tie_break if b in index),
    )
    return truncated, index


@pytest.mark.parametrize("seed", range(60))
def test_alloc_literal__matches_recompute_random(seed):
    instance = _random_instance(seed)
    for params in RANDOM_PARAMS:
        for prediction in _predictions(instance):
            literal = run(instance, params, prediction, literal=True)
            recompute = run(instance, params, prediction)
            assert literal.winner == recompute.winner
            assert literal.price == recompute.price
            assert literal.threshold == recompute.threshold


@pytest.mark.parametrize("seed", range(60))
def test_payment__single_threshold_above_posted(seed):
    instance = _random_instance(seed)
    for params in RANDOM_PARAMS:
        for prediction in _predictions(instance):
            result = alloc(instance, params, prediction, record=False)
            if not result.sold:
                continue
            if result.transition_v_max < params.gamma * prediction:
                continue
            outcome = run(instance, params, prediction)
            assert outcome.price == result.transition_v_max


@pytest.mark.parametrize("seed", range(60))
def test_run__price_fixed_by_winner_departure(seed):
    instance = _random_instance(seed)
    for params in RANDOM_PARAMS:
        pinned = AuctionParams(params.alpha, params.gamma, n=instance.n)
        for prediction in _predictions(instance):
            outcome = run(instance, pinned, prediction)
            if not outcome.sold:
                continue
            truncated, index = _truncated(instance, outcome.allocation_time)
            cut = run(truncated, pinned, prediction)
            assert cut.winner == index[outcome.winner]
            assert cut.price == outcome.price


def test_run_with_reports__late_departure_pays_without_value(
    payment_instance, payment_params
):
    reports = list(payment_instance.bidders)
    reports[0] = BidderType(0, 11, 9)
    outcome = run_with_reports(
        payment_instance, reports, payment_params, PAYMENT_PREDICTION
    )
    assert outcome.winner == 0
    assert outcome.price == 5
    assert outcome.welfare == 0
    assert outcome.utilities[0] == -5


@pytest.mark.parametrize("seed", range(30))
def test_run_with_reports__late_departure_random(seed):
    instance = _random_instance(seed)
    params = AuctionParams(HALF)
    for prediction in _predictions(instance):
        truthful = run(instance, params, prediction)
        if not truthful.sold:
            continue
        winner = truthful.winner
        reports = list(instance.bidders)
        truth = instance[winner]
        reports[winner] = truth.replace(departure=truth.departure + 1)
        outcome = run_with_reports(instance, reports, params, prediction)
        if outcome.winner == winner:
            assert outcome.utilities[winner] == -outcome.price
