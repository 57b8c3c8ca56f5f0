# coding=utf-8

"""Event-driven allocation and payment rules of the Three-Phase auction.

The functions here are the low-level building blocks; `auctionlab.mechanisms`
wraps them into configurable mechanism objects.
"""

import json
from collections import namedtuple
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from math import ceil, floor

from auctionlab import log
from auctionlab.core import Instance, as_prediction
from auctionlab.exceptions import AuctionLabException, AuctionLabInputException
from auctionlab.utils import INFINITY, format_rational, to_rational

__all__ = [
    "ARRIVAL",
    "CLINCH",
    "DEPARTURE",
    "THRESHOLD_UPDATE",
    "AllocationResult",
    "Event",
    "EventTrace",
    "Outcome",
    "PhaseMilestones",
    "alloc",
    "alloc_literal",
    "departure_index",
    "event_schedule",
    "milestones",
    "outcome_of",
    "payment",
    "phase_threshold",
    "reported_instance",
    "run",
    "run_with_reports",
    "settle",
]

ARRIVAL = "arrival"
DEPARTURE = "departure"
THRESHOLD_UPDATE = "threshold_update"
CLINCH = "clinch"

PhaseMilestones = namedtuple("PhaseMilestones", ["i1_count", "i2_count"])

Event = namedtuple(
    "Event", ["time", "kind", "bidder", "tau_before", "tau_after", "v_max"]
)


def _jsonable(value):
    if value is None:
        return None
    if value == INFINITY:
        return "inf"
    return format_rational(value)


class EventTrace(object):
    """Ordered record of the events the allocation rule processed."""

    def __init__(self, events=()):
        self._events = list(events)

    def __iter__(self):
        return iter(self._events)

    def __len__(self):
        return len(self._events)

    def __getitem__(self, index):
        return self._events[index]

    def __eq__(self, other):
        return isinstance(other, EventTrace) and self._events == other._events

    def __repr__(self):
        return "<EventTrace: %d events>" % len(self._events)

    def append(self, event):
        self._events.append(event)

    def of_kind(self, kind):
        return [e for e in self._events if e.kind == kind]

    def to_json_lines(self):
        lines = []
        for event in self._events:
            lines.append(
                json.dumps(
                    {
                        "time": _jsonable(event.time),
                        "kind": event.kind,
                        "bidder": event.bidder,
                        "tau_before": _jsonable(event.tau_before),
                        "tau_after": _jsonable(event.tau_after),
                        "v_max": _jsonable(event.v_max),
                    },
                    sort_keys=True,
                )
            )
        return "\n".join(lines)


@dataclass(frozen=True)
class AllocationResult:
    """Outcome of the allocation rule; `threshold` is final when unsold."""

    winner: int = None
    threshold: object = INFINITY
    active_winner: bool = False
    phase: int = None
    clinch_time: object = None
    transition_v_max: object = None
    trace: EventTrace = None

    @property
    def sold(self):
        return self.winner is not None


@dataclass(frozen=True)
class Outcome:
    winner: int = None
    allocation_time: object = None
    price: object = 0
    revenue: object = 0
    welfare: object = 0
    threshold: object = INFINITY
    utilities: tuple = None
    trace: EventTrace = None

    @property
    def sold(self):
        return self.winner is not None


def milestones(n, alpha):
    """Departure counts that open the second and third phases."""
    return _milestone_counts(n, alpha)


def _milestone_counts(n, alpha):
    alpha = to_rational(alpha)
    if n < 1:
        raise AuctionLabInputException("n must be positive")
    if not 0 <= alpha <= 1:
        raise AuctionLabInputException("alpha must lie in [0, 1]")
    i1 = ceil((1 - alpha) * n / 2)
    i2 = floor((1 + alpha) * n / 2)
    return PhaseMilestones(i1, max(i1, i2))


def phase_threshold(departed, v_max, counts, posted):
    """Threshold after `departed` departures; `posted` is gamma * prediction."""
    if departed < counts.i1_count:
        return INFINITY
    if departed < counts.i2_count:
        return max(v_max, posted)
    return v_max


def _phase(departed, counts):
    if departed < counts.i1_count:
        return 1
    if departed < counts.i2_count:
        return 2
    return 3


@lru_cache(maxsize=4096)
def _schedule(intervals, rank):
    events = []
    for bidder, (arrival, departure) in enumerate(intervals):
        events.append((arrival, 0, rank[bidder], bidder))
        events.append((departure, 1, rank[bidder], bidder))
    events.sort()
    return tuple(
        (time, ARRIVAL if kind == 0 else DEPARTURE, bidder)
        for time, kind, _, bidder in events
    )


def event_schedule(instance):
    """Events ordered by time, arrivals before departures, then by priority."""
    return _schedule(instance.intervals, instance.rank)


def departure_index(instance, bidder):
    """1-based position of `bidder` among all reported departures."""
    position = 0
    for _, kind, other in event_schedule(instance):
        if kind == DEPARTURE:
            position += 1
            if other == bidder:
                return position
    raise AuctionLabInputException("unknown bidder %r" % bidder)


def _counts_for(instance, params, counts):
    if counts is not None:
        return PhaseMilestones(*counts)
    return _milestone_counts(params.n or instance.n, params.alpha)


def alloc(
    instance, params, prediction, milestones=None, exclude=None, record=True
):
    """Runs the allocation rule, recomputing the threshold after each departure.

    `exclude` removes one bidder from the event stream while keeping the
    milestone counts; `milestones` overrides the counts derived from params.
    """
    counts = _counts_for(instance, params, milestones)
    posted = params.gamma * as_prediction(prediction).value
    values = instance.values
    rank = instance.rank
    trace = EventTrace() if record else None
    active = set()
    departed = 0
    v_max = Fraction(0)
    transition_v_max = None
    tau = phase_threshold(departed, v_max, counts, posted)
    if counts.i1_count == 0:
        transition_v_max = v_max

    for time, kind, bidder in event_schedule(instance):
        if bidder == exclude:
            continue
        if kind == ARRIVAL:
            if record:
                trace.append(Event(time, ARRIVAL, bidder, tau, tau, v_max))
            if values[bidder] >= tau:
                if record:
                    trace.append(Event(time, CLINCH, bidder, tau, tau, v_max))
                return AllocationResult(
                    bidder,
                    tau,
                    False,
                    _phase(departed, counts),
                    time,
                    transition_v_max,
                    trace,
                )
            active.add(bidder)
            continue

        active.discard(bidder)
        departed += 1
        v_max = max(v_max, values[bidder])
        if departed == counts.i1_count:
            transition_v_max = v_max
        updated = phase_threshold(departed, v_max, counts, posted)
        if record:
            trace.append(Event(time, DEPARTURE, bidder, tau, tau, v_max))
            if updated != tau:
                trace.append(
                    Event(time, THRESHOLD_UPDATE, None, tau, updated, v_max)
                )
        tau = updated
        eligible = [b for b in active if values[b] >= tau]
        if eligible:
            winner = min(eligible, key=rank.__getitem__)
            if record:
                trace.append(Event(time, CLINCH, winner, tau, tau, v_max))
            return AllocationResult(
                winner,
                tau,
                True,
                _phase(departed, counts),
                time,
                transition_v_max,
                trace,
            )

    return AllocationResult(
        None, tau, False, None, None, transition_v_max, trace
    )


def alloc_literal(instance, params, prediction, milestones=None, record=True):
    """Allocation rule with the two one-shot threshold updates.

    Only meaningful when 1 <= i1_count < i2_count; used to cross-check `alloc`.
    """
    counts = _counts_for(instance, params, milestones)
    posted = params.gamma * as_prediction(prediction).value
    values = instance.values
    rank = instance.rank
    trace = EventTrace() if record else None
    active = set()
    departed = 0
    v_max = Fraction(0)
    tau = INFINITY
    phase = 1
    transition_v_max = None

    for time, kind, bidder in event_schedule(instance):
        if kind == ARRIVAL:
            if record:
                trace.append(Event(time, ARRIVAL, bidder, tau, tau, v_max))
            if values[bidder] >= tau:
                if record:
                    trace.append(Event(time, CLINCH, bidder, tau, tau, v_max))
                return AllocationResult(
                    bidder, tau, False, phase, time, transition_v_max, trace
                )
            active.add(bidder)
            continue

        active.discard(bidder)
        departed += 1
        v_max = max(v_max, values[bidder])
        if record:
            trace.append(Event(time, DEPARTURE, bidder, tau, tau, v_max))
        updated = tau
        if departed == counts.i1_count:
            updated, phase = max(v_max, posted), 2
            transition_v_max = v_max
        elif departed == counts.i2_count:
            updated, phase = v_max, 3
        if updated != tau:
            if record:
                trace.append(
                    Event(time, THRESHOLD_UPDATE, None, tau, updated, v_max)
                )
            tau = updated
            eligible = [b for b in active if values[b] >= tau]
            if eligible:
                winner = min(eligible, key=rank.__getitem__)
                if record:
                    trace.append(Event(time, CLINCH, winner, tau, tau, v_max))
                return AllocationResult(
                    winner, tau, True, phase, time, transition_v_max, trace
                )

    return AllocationResult(
        None, tau, False, None, None, transition_v_max, trace
    )


def payment(
    instance,
    params,
    prediction,
    alloc_result,
    milestones=None,
    rerun=True,
    tie_break_rule=True,
    rerun_rescale=False,
):
    """Price charged to the winner of `alloc_result`.

    The price starts at the clinch threshold. When the prediction was the
    binding second-phase price and the winner departs after the third phase
    opened, the allocation is rerun without the winner and its final threshold
    replaces the price unless an active rerun winner outranks the winner.
    """
    if alloc_result.winner is None:
        raise AuctionLabInputException("payment requires a sold allocation")
    winner = alloc_result.winner
    counts = _counts_for(instance, params, milestones)
    posted = params.gamma * as_prediction(prediction).value
    price = alloc_result.threshold

    binding = (
        alloc_result.phase == 2
        and price == posted
        and alloc_result.transition_v_max is not None
        and alloc_result.transition_v_max < posted
    )
    if not (rerun and binding):
        return price
    if departure_index(instance, winner) <= counts.i2_count:
        return price

    rerun_counts = counts
    if rerun_rescale:
        rerun_counts = _milestone_counts(instance.n - 1, params.alpha)
    second = alloc(
        instance,
        params,
        prediction,
        milestones=rerun_counts,
        exclude=winner,
        record=False,
    )
    log.debug(
        "rerun without bidder %d: winner=%s threshold=%s active=%s",
        winner,
        second.winner,
        second.threshold,
        second.active_winner,
    )
    outranks = (
        second.winner is None
        or instance.rank[winner] < instance.rank[second.winner]
    )
    if not tie_break_rule or not second.active_winner or outranks:
        price = second.threshold
    if price > alloc_result.threshold:
        msg = "price %s exceeds clinch threshold %s" % (
            price,
            alloc_result.threshold,
        )
        log.error(msg)
        raise AuctionLabException(msg)
    return price


def outcome_of(instance, result, price):
    """Wraps an allocation and its price into an Outcome on `instance`."""
    if result.winner is None:
        return Outcome(threshold=result.threshold, trace=result.trace)
    allocation_time = instance[result.winner].departure
    winner = instance[result.winner]
    welfare = winner.value if winner.active_at(allocation_time) else 0
    return Outcome(
        result.winner,
        allocation_time,
        price,
        price,
        welfare,
        result.threshold,
        None,
        result.trace,
    )


def run(instance, params, prediction, record=False, **options):
    """Allocates and prices one auction; options are forwarded to `payment`.

    Set `literal=True` to allocate with `alloc_literal`.
    """
    literal = options.pop("literal", False)
    counts = options.pop("milestones", None)
    allocate = alloc_literal if literal else alloc
    result = allocate(
        instance, params, prediction, milestones=counts, record=record
    )
    price = 0
    if result.winner is not None:
        price = payment(
            instance, params, prediction, result, milestones=counts, **options
        )
    return outcome_of(instance, result, price)


def reported_instance(instance, reports):
    """Validates `reports` against the true types and builds the reported
    instance. Arrivals may only be delayed; departures may not precede the
    reported arrival.
    """
    if len(reports) != instance.n:
        raise AuctionLabInputException("one report per bidder is required")
    for bidder, (truth, report) in enumerate(zip(instance.bidders, reports)):
        if report.arrival < truth.arrival:
            raise AuctionLabInputException(
                "bidder %d reports arrival %s before its true arrival %s"
                % (bidder, report.arrival, truth.arrival)
            )
        if report.departure < report.arrival:
            raise AuctionLabInputException(
                "bidder %d reports departure before arrival" % bidder
            )
    return Instance(tuple(reports), instance.tie_break, False)


def settle(instance, outcome):
    """Scores an outcome computed on reports against the true types."""
    utilities = [0] * instance.n
    welfare = 0
    if outcome.winner is not None:
        truth = instance[outcome.winner]
        if truth.active_at(outcome.allocation_time):
            welfare = truth.value
            utilities[outcome.winner] = truth.value - outcome.price
        else:
            utilities[outcome.winner] = -outcome.price
    return replace(outcome, welfare=welfare, utilities=tuple(utilities))


def run_with_reports(instance, reports, params, prediction, record=False, **options):
    """Runs the auction on reported types and scores utilities on true types."""
    reported = reported_instance(instance, reports)
    outcome = run(reported, params, prediction, record=record, **options)
    return settle(instance, outcome)
