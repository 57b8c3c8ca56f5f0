# coding=utf-8

"""Exhaustive search for profitable unilateral misreports on small instances.

Outcomes are piecewise constant in a report between the values, times and
prices the engine can produce, so a grid straddling each of those points
covers every behaviour a deviation can trigger.
"""

from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from itertools import product

import numpy as np

from auctionlab import log
from auctionlab.core import BidderType, Instance, as_prediction, rng_for
from auctionlab.exceptions import AuctionLabInputException
from auctionlab.mechanisms import mechanism_factory
from auctionlab.reports import DeviationReport
from auctionlab.utils import worker_count

__all__ = [
    "ADVERSARIAL_MAX_N",
    "audit_bidder",
    "audit_instance",
    "deviation_grid",
    "straddle_step",
]

ADVERSARIAL_MAX_N = 6


def straddle_step(points):
    """Half the smallest gap between distinct points, 1/2 for a single point."""
    distinct = sorted(set(points))
    gaps = [b - a for a, b in zip(distinct, distinct[1:])]
    return min(gaps) / 2 if gaps else Fraction(1, 2)


def _straddle(points, step):
    grid = set(points)
    for p in points:
        grid.add(p - step)
        grid.add(p + step)
    return grid


def deviation_grid(instance, bidder, prediction=None, gamma=1):
    """Candidate reports for `bidder`, ordered by (value, arrival, departure).

    Values straddle every bidder value and, when a prediction is given, the
    posted prices prediction and gamma * prediction. Times straddle every
    reported event time; arrivals are never earlier than the true arrival
    and departures never precede the reported arrival.
    """
    truth = instance[bidder]
    value_points = list(instance.values)
    if prediction is not None:
        posted = as_prediction(prediction).value
        value_points += [posted, gamma * posted]
    value_step = straddle_step(value_points)
    values = {v for v in _straddle(value_points, value_step) if v >= 0}
    values |= {Fraction(0), truth.value}

    time_points = [t for interval in instance.intervals for t in interval]
    time_step = straddle_step(time_points)
    times = {t for t in _straddle(time_points, time_step) if t >= 0}
    arrivals = sorted(t for t in times | {truth.arrival} if t >= truth.arrival)
    departures = sorted(times | {truth.departure})

    return [
        BidderType(a, d, v)
        for v, a, d in product(sorted(values), arrivals, departures)
        if d >= a
    ]


def _mechanism(params, mechanism):
    if mechanism is not None:
        return mechanism
    name = "three-phase" if params.gamma == 1 else "error-tolerant"
    return mechanism_factory(name, params=params)


def _utilities(mechanism, instance, reports, bidder, prediction, candidates):
    reports = list(reports)
    utilities = []
    for candidate in candidates:
        reports[bidder] = candidate
        outcome = mechanism.run_with_reports(instance, reports, prediction)
        utilities.append(outcome.utilities[bidder])
    return utilities


def _utilities_star(args):
    return _utilities(*args)


def audit_bidder(
    instance,
    params,
    prediction,
    bidder,
    others_reports=None,
    mechanism=None,
    grid=None,
    workers=None,
):
    """Best unilateral deviation of `bidder` against fixed reports of others.

    Ties between maximizing reports go to the first one in grid order.
    """
    prediction = as_prediction(prediction)
    mechanism = _mechanism(params, mechanism)
    reports = list(others_reports or instance.bidders)
    reports[bidder] = instance[bidder]
    if grid is None:
        grid = deviation_grid(instance, bidder, prediction, mechanism.gamma)

    truthful = mechanism.run_with_reports(instance, reports, prediction)
    truthful_utility = truthful.utilities[bidder]

    workers = min(worker_count(workers), len(grid))
    chunks = [list(c) for c in np.array_split(np.arange(len(grid)), workers)]
    jobs = [
        (mechanism, instance, reports, bidder, prediction, [grid[i] for i in c])
        for c in chunks
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(_utilities_star, jobs))
    else:
        parts = [_utilities_star(job) for job in jobs]
    utilities = [u for part in parts for u in part]

    best_index = 0
    for index, utility in enumerate(utilities):
        if utility > utilities[best_index]:
            best_index = index
    best_report = grid[best_index]
    best_utility = utilities[best_index]

    reports[bidder] = best_report
    witness = mechanism.traced().run_with_reports(instance, reports, prediction)
    gain = best_utility - truthful_utility
    if gain > 0:
        log.warning(
            "bidder %d gains %s by reporting %s", bidder, gain, best_report
        )
    return DeviationReport(
        bidder=bidder,
        best_report=best_report,
        truthful_utility=truthful_utility,
        best_utility=best_utility,
        gain=gain,
        candidates=len(grid),
        witness_trace=witness.trace,
    )


def _sampled_profile(instance, bidder, prediction, gamma, rng):
    reports = list(instance.bidders)
    for other in range(instance.n):
        if other == bidder:
            continue
        grid = deviation_grid(instance, other, prediction, gamma)
        reports[other] = grid[int(rng.integers(len(grid)))]
    return Instance(tuple(reports), instance.tie_break, False)


def audit_instance(
    instance,
    params,
    prediction,
    adversarial_others=False,
    samples=4,
    seed=0,
    mechanism=None,
    workers=None,
):
    """Audits every bidder against truthful others.

    With `adversarial_others`, each bidder is also audited against `samples`
    report profiles of the others drawn from their own grids, and the worst
    case is kept.
    """
    prediction = as_prediction(prediction)
    mechanism = _mechanism(params, mechanism)
    if adversarial_others and instance.n > ADVERSARIAL_MAX_N:
        raise AuctionLabInputException(
            "adversarial audits are limited to n <= %d" % ADVERSARIAL_MAX_N
        )
    reports = []
    for bidder in range(instance.n):
        report = audit_bidder(
            instance,
            params,
            prediction,
            bidder,
            mechanism=mechanism,
            workers=workers,
        )
        if adversarial_others:
            for sample in range(samples):
                rng = rng_for(seed, bidder, sample)
                profile = _sampled_profile(
                    instance, bidder, prediction, mechanism.gamma, rng
                )
                candidate = audit_bidder(
                    profile,
                    params,
                    prediction,
                    bidder,
                    mechanism=mechanism,
                    workers=workers,
                )
                if candidate["gain"] > report["gain"]:
                    report = candidate
        log.debug("bidder %d: gain %s", bidder, report["gain"])
        reports.append(report)
    return reports
