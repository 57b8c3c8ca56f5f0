# coding=utf-8

"""Domain types, instance construction, random matching and serialization."""

import json
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import factorial

import numpy as np

from auctionlab import log
from auctionlab.exceptions import AuctionLabInputException
from auctionlab.utils import format_rational, to_rational

__all__ = [
    "AuctionParams",
    "BidderType",
    "Instance",
    "Matching",
    "Prediction",
    "apply_matching",
    "as_prediction",
    "canonical_consistency_instance",
    "canonical_robustness_instance",
    "disjoint_intervals",
    "distinct_orderings",
    "dump_instance",
    "emit_instance",
    "has_distinct_values",
    "in_w_n",
    "instance_from_dict",
    "instance_to_dict",
    "load_instance",
    "ordering_weight",
    "parse_instance",
    "perturb_distinct",
    "random_matching",
    "random_overlapping_instance",
    "rng_for",
    "sequential_instance",
]


@dataclass(frozen=True)
class BidderType:
    """A bidder's private type: arrival, departure and value."""

    arrival: Fraction
    departure: Fraction
    value: Fraction

    def __post_init__(self):
        for name in ("arrival", "departure", "value"):
            object.__setattr__(self, name, to_rational(getattr(self, name)))
        if self.arrival < 0:
            raise AuctionLabInputException("arrival must be nonnegative")
        if self.departure < self.arrival:
            raise AuctionLabInputException(
                "departure %s precedes arrival %s"
                % (self.departure, self.arrival)
            )
        if self.value < 0:
            raise AuctionLabInputException("value must be nonnegative")

    @property
    def interval(self):
        return self.arrival, self.departure

    def active_at(self, t):
        return self.arrival <= t <= self.departure

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class Instance:
    """Bidder types indexed by identity plus the tie-break order.

    `tie_break` lists bidder identities from highest to lowest priority.
    """

    bidders: tuple
    tie_break: tuple = None
    distinct: bool = False
    rank: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        bidders = tuple(
            b if isinstance(b, BidderType) else BidderType(*b)
            for b in self.bidders
        )
        n = len(bidders)
        if n < 1:
            raise AuctionLabInputException("an instance needs at least one bidder")
        tie_break = (
            tuple(range(n))
            if self.tie_break is None
            else tuple(int(i) for i in self.tie_break)
        )
        if sorted(tie_break) != list(range(n)):
            raise AuctionLabInputException(
                "tie_break must be a permutation of 0..%d" % (n - 1)
            )
        if self.distinct and not has_distinct_values(b.value for b in bidders):
            raise AuctionLabInputException(
                "instance is flagged distinct but has repeated values"
            )
        rank = [0] * n
        for position, bidder in enumerate(tie_break):
            rank[bidder] = position
        object.__setattr__(self, "bidders", bidders)
        object.__setattr__(self, "tie_break", tie_break)
        object.__setattr__(self, "distinct", bool(self.distinct))
        object.__setattr__(self, "rank", tuple(rank))

    def __len__(self):
        return len(self.bidders)

    def __getitem__(self, bidder):
        return self.bidders[bidder]

    @property
    def n(self):
        return len(self.bidders)

    @property
    def values(self):
        return tuple(b.value for b in self.bidders)

    @property
    def intervals(self):
        return tuple(b.interval for b in self.bidders)


@dataclass(frozen=True)
class AuctionParams:
    """Auction parameters; `n` pins the milestone counts when set."""

    alpha: Fraction
    gamma: Fraction = Fraction(1)
    n: int = None
    strict_wn: bool = False

    def __post_init__(self):
        alpha = to_rational(self.alpha)
        gamma = to_rational(self.gamma)
        if not 0 <= alpha <= 1:
            raise AuctionLabInputException("alpha must lie in [0, 1]")
        if not 0 <= gamma <= 1:
            raise AuctionLabInputException("gamma must lie in [0, 1]")
        if self.n is not None and self.n < 1:
            raise AuctionLabInputException("n must be positive")
        if self.strict_wn and self.n is not None and not in_w_n(self.n, alpha):
            raise AuctionLabInputException(
                "alpha=%s is not in W_%d" % (alpha, self.n)
            )
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "gamma", gamma)

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class Prediction:
    """A prediction of the highest value."""

    value: Fraction

    def __post_init__(self):
        value = to_rational(self.value)
        if value < 0:
            raise AuctionLabInputException("prediction must be nonnegative")
        object.__setattr__(self, "value", value)


@dataclass(frozen=True)
class Matching:
    """Assignment of value slots to interval slots."""

    assignment: tuple

    def __post_init__(self):
        assignment = tuple(int(i) for i in self.assignment)
        if sorted(assignment) != list(range(len(assignment))):
            raise AuctionLabInputException("a matching must be a bijection")
        object.__setattr__(self, "assignment", assignment)


def as_prediction(prediction):
    """Accepts a Prediction or anything `to_rational` understands."""
    if isinstance(prediction, Prediction):
        return prediction
    return Prediction(prediction)


def has_distinct_values(values):
    values = list(values)
    return len(set(values)) == len(values)


def in_w_n(n, alpha):
    """Whether alpha*n and (1 - alpha)*n/2 are both integers."""
    alpha = to_rational(alpha)
    return (alpha * n).denominator == 1 and ((1 - alpha) * n / 2).denominator == 1


def rng_for(seed, *stream):
    """A numpy generator seeded by any integer plus optional stream indices."""
    seed = int(seed)
    entropy = [0 if seed >= 0 else 1, abs(seed)] + [int(s) for s in stream]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def _intervals(intervals):
    try:
        return [(to_rational(a), to_rational(d)) for a, d in intervals]
    except (TypeError, ValueError):
        raise AuctionLabInputException("intervals must be (arrival, departure) pairs")


def apply_matching(values, intervals, matching, tie_break=None):
    """Builds the instance where value slot j sits on interval assignment[j]."""
    values = [to_rational(v) for v in values]
    intervals = _intervals(intervals)
    if len(values) != len(intervals):
        raise AuctionLabInputException(
            "%d values cannot be matched to %d intervals"
            % (len(values), len(intervals))
        )
    if not isinstance(matching, Matching):
        matching = Matching(matching)
    placed = [None] * len(values)
    for slot, target in enumerate(matching.assignment):
        placed[target] = values[slot]
    bidders = tuple(
        BidderType(a, d, v) for (a, d), v in zip(intervals, placed)
    )
    return Instance(bidders, tie_break, has_distinct_values(values))


def random_matching(values, intervals, seed, tie_break=None):
    """Matches values to intervals uniformly at random, deterministic in seed."""
    if len(values) != len(intervals):
        raise AuctionLabInputException(
            "%d values cannot be matched to %d intervals"
            % (len(values), len(intervals))
        )
    assignment = rng_for(seed).permutation(len(values))
    return apply_matching(values, intervals, Matching(assignment), tie_break)


def sequential_instance(values):
    """Bidder i (0-based) arrives and departs at time i + 1."""
    values = list(values)
    if not values:
        raise AuctionLabInputException("a sequential instance needs values")
    bidders = tuple(
        BidderType(t, t, v) for t, v in enumerate(values, start=1)
    )
    return Instance(bidders, None, has_distinct_values(b.value for b in bidders))


def disjoint_intervals(n):
    """Unit-time, non-overlapping intervals (1,1), ..., (n,n)."""
    return [(Fraction(t), Fraction(t)) for t in range(1, n + 1)]


def canonical_consistency_instance(n):
    """Values (1, 0, ..., 0) with the correct prediction 1."""
    if n < 2:
        raise AuctionLabInputException("the consistency instance needs n >= 2")
    values = [Fraction(1)] + [Fraction(0)] * (n - 1)
    return values, Prediction(1)


def canonical_robustness_instance(n, eps):
    """Values (1, eps, 0, ..., 0) with over, under and intermediate predictions."""
    eps = to_rational(eps)
    if n < 2:
        raise AuctionLabInputException("the robustness instance needs n >= 2")
    if not 0 < eps < 1:
        raise AuctionLabInputException("eps must lie strictly between 0 and 1")
    values = [Fraction(1), eps] + [Fraction(0)] * (n - 2)
    scenarios = [Prediction(2), Prediction(eps / 2), Prediction((1 + eps) / 2)]
    return values, scenarios


def perturb_distinct(values, step=None):
    """Breaks ties by adding multiples of `step`, preserving the value order.

    The default step is small enough that no perturbed value crosses the
    next larger original value.
    """
    values = [to_rational(v) for v in values]
    distinct = sorted(set(values))
    gaps = [b - a for a, b in zip(distinct, distinct[1:])]
    if step is None:
        step = (min(gaps) if gaps else Fraction(1)) / (len(values) + 1)
    step = to_rational(step)
    seen = Counter()
    perturbed = []
    for v in values:
        perturbed.append(v + seen[v] * step)
        seen[v] += 1
    return perturbed


def ordering_weight(values):
    """Number of value-slot permutations behind each distinct ordering."""
    weight = 1
    for multiplicity in Counter(values).values():
        weight *= factorial(multiplicity)
    return weight


def distinct_orderings(values):
    """Yields every distinct arrangement of the value multiset once.

    Each arrangement stands for `ordering_weight(values)` of the n! matchings.
    """
    counts = Counter(values)
    keys = sorted(counts, reverse=True)
    n = len(values)
    current = []

    def _extend():
        if len(current) == n:
            yield tuple(current)
            return
        for key in keys:
            if counts[key]:
                counts[key] -= 1
                current.append(key)
                for ordering in _extend():
                    yield ordering
                current.pop()
                counts[key] += 1

    return _extend()


def random_overlapping_instance(n, seed, horizon=None):
    """Random integer-time instance with overlapping intervals and distinct
    values; the tie-break order is a random permutation as well.
    """
    if n < 1:
        raise AuctionLabInputException("n must be positive")
    rng = rng_for(seed)
    horizon = horizon or 2 * n
    arrivals = rng.integers(0, horizon, size=n)
    durations = rng.integers(0, n + 1, size=n)
    values = rng.choice(np.arange(1, 4 * n + 1), size=n, replace=False)
    bidders = tuple(
        BidderType(int(a), int(a) + int(d), int(v))
        for a, d, v in zip(arrivals, durations, values)
    )
    tie_break = tuple(int(i) for i in rng.permutation(n))
    return Instance(bidders, tie_break, True)


def instance_to_dict(instance):
    return {
        "bidders": [
            {
                "arrival": format_rational(b.arrival),
                "departure": format_rational(b.departure),
                "value": format_rational(b.value),
            }
            for b in instance.bidders
        ],
        "tie_break": list(instance.tie_break),
        "distinct": instance.distinct,
    }


def instance_from_dict(content):
    if not isinstance(content, dict) or "bidders" not in content:
        raise AuctionLabInputException("instance must be an object with 'bidders'")
    try:
        bidders = tuple(
            BidderType(b["arrival"], b["departure"], b["value"])
            for b in content["bidders"]
        )
    except (KeyError, TypeError) as e:
        raise AuctionLabInputException("malformed bidder entry: %r" % e)
    return Instance(
        bidders, content.get("tie_break"), bool(content.get("distinct", False))
    )


def emit_instance(instance):
    return json.dumps(instance_to_dict(instance), sort_keys=True)


def parse_instance(text):
    try:
        content = json.loads(text)
    except ValueError as e:
        raise AuctionLabInputException("instance is not valid JSON: %s" % e)
    return instance_from_dict(content)


def load_instance(file_path):
    log.info("loading instance: %s", file_path)
    try:
        with open(file_path, "r") as fp:
            return parse_instance(fp.read())
    except (IOError, OSError) as e:
        raise AuctionLabInputException("cannot read %s: %s" % (file_path, e))


def dump_instance(instance, file_path):
    with open(file_path, "w") as fp:
        fp.write(emit_instance(instance))
