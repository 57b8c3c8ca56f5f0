# coding=utf-8

"""Exact and Monte Carlo evaluation of mechanisms over the random matching.

Exact mode averages over every assignment of values to intervals; repeated
values are enumerated once per distinct arrangement since every arrangement
stands for the same number of assignments.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from auctionlab import log
from auctionlab.core import (
    AuctionParams,
    BidderType,
    Instance,
    Matching,
    apply_matching,
    as_prediction,
    canonical_consistency_instance,
    canonical_robustness_instance,
    disjoint_intervals,
    distinct_orderings,
    in_w_n,
    rng_for,
)
from auctionlab.engine import milestones
from auctionlab.exceptions import AuctionLabInputException
from auctionlab.mechanisms import mechanism_factory
from auctionlab.reports import ErrorTolerantReport, EvalReport, SweepRow
from auctionlab.utils import (
    cache_enabled,
    cache_get,
    cache_key,
    cache_put,
    ensure_enumerable,
    format_rational,
    to_rational,
    worker_count,
)

__all__ = [
    "DEFAULT_ALPHA_GRID",
    "DEFAULT_DELTA",
    "PredictionQuality",
    "benchmarks",
    "consistency_ratio",
    "default_scenarios",
    "error_tolerant_check",
    "exact_expected_revenue",
    "mc_expected_revenue",
    "prediction_quality",
    "robustness_floor",
    "robustness_profile",
    "robustness_ratio",
    "tradeoff_sweep",
]

DEFAULT_DELTA = Fraction(1, 100)
DEFAULT_ALPHA_GRID = tuple(Fraction(k, 5) for k in range(6))


@dataclass(frozen=True)
class PredictionQuality:
    q: Fraction

    def __post_init__(self):
        q = to_rational(self.q)
        if not 0 <= q <= 1:
            raise AuctionLabInputException("prediction quality must lie in [0, 1]")
        object.__setattr__(self, "q", q)


def benchmarks(values):
    """Highest and second-highest value; the latter is 0 for one bidder."""
    ordered = sorted((to_rational(v) for v in values), reverse=True)
    if not ordered:
        raise AuctionLabInputException("values must not be empty")
    return ordered[0], (ordered[1] if len(ordered) > 1 else Fraction(0))


def _prepare(values, intervals):
    values = [to_rational(v) for v in values]
    intervals = [(to_rational(a), to_rational(d)) for a, d in intervals]
    if not values:
        raise AuctionLabInputException("values must not be empty")
    if len(values) != len(intervals):
        raise AuctionLabInputException(
            "%d values cannot be matched to %d intervals"
            % (len(values), len(intervals))
        )
    return values, intervals


def _mechanism(params, mechanism):
    if mechanism is not None:
        return mechanism
    name = "three-phase" if params.gamma == 1 else "error-tolerant"
    return mechanism_factory(name, params=params)


def _accumulate(mechanism, prediction, values, intervals, tie_break, head):
    """Sums revenue, welfare and benchmark hits over arrangements starting
    with `head`.
    """
    v1, v2 = benchmarks(values)
    bidder_types = {
        (slot, v): BidderType(a, d, v)
        for slot, (a, d) in enumerate(intervals)
        for v in set(values)
    }
    rest = list(values)
    rest.remove(head)
    revenue = welfare = Fraction(0)
    hits_v1 = hits_v2 = count = 0
    for tail in distinct_orderings(rest) if rest else [()]:
        ordering = (head,) + tail
        instance = Instance(
            tuple(bidder_types[slot, v] for slot, v in enumerate(ordering)),
            tie_break,
        )
        outcome = mechanism.run(instance, prediction)
        revenue += outcome.revenue
        welfare += outcome.welfare
        hits_v1 += outcome.revenue >= v1
        hits_v2 += outcome.revenue >= v2
        count += 1
    return revenue, welfare, hits_v1, hits_v2, count


def _accumulate_star(args):
    return _accumulate(*args)


def _exact_cache_key(mechanism, prediction, values, intervals, tie_break):
    return cache_key(
        kind="exact",
        values=[format_rational(v) for v in values],
        intervals=[
            "%s:%s" % (format_rational(a), format_rational(d))
            for a, d in intervals
        ],
        tie_break=list(tie_break) if tie_break else None,
        prediction=format_rational(prediction.value),
        **mechanism.options
    )


def exact_expected_revenue(
    values,
    intervals,
    params,
    prediction,
    mechanism=None,
    tie_break=None,
    cap=None,
    workers=None,
    cache=None,
):
    """Expected revenue and welfare over all n! matchings, as exact rationals.

    Raises AuctionLabEnumerationException above the enumeration cap.
    """
    values, intervals = _prepare(values, intervals)
    n = len(values)
    ensure_enumerable(n, cap, "exact expected revenue")
    prediction = as_prediction(prediction)
    mechanism = _mechanism(params, mechanism)

    use_cache = cache_enabled(cache)
    key = None
    if use_cache:
        key = _exact_cache_key(mechanism, prediction, values, intervals, tie_break)
        cached = cache_get(key)
        if cached is not None:
            return EvalReport(**cached)

    heads = sorted(set(values), reverse=True)
    jobs = [
        (mechanism, prediction, values, intervals, tie_break, head)
        for head in heads
    ]
    workers = min(worker_count(workers), len(jobs))
    log.info("exact enumeration: n=%d, %d workers", n, workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(_accumulate_star, jobs))
    else:
        parts = [_accumulate_star(job) for job in jobs]

    revenue = sum(p[0] for p in parts)
    welfare = sum(p[1] for p in parts)
    hits_v1 = sum(p[2] for p in parts)
    hits_v2 = sum(p[3] for p in parts)
    count = sum(p[4] for p in parts)
    log.debug("%d distinct arrangements stand for %d matchings", count, factorial(n))

    v1, v2 = benchmarks(values)
    expected_revenue = revenue / count
    expected_welfare = welfare / count
    report = EvalReport(
        mode="exact",
        mechanism=mechanism.name,
        n=n,
        alpha=mechanism.alpha,
        gamma=mechanism.gamma,
        prediction=prediction.value,
        expected_revenue=expected_revenue,
        expected_welfare=expected_welfare,
        benchmark_v1=v1,
        benchmark_v2=v2,
        ratio_v1=expected_revenue / v1 if v1 else None,
        ratio_v2=expected_revenue / v2 if v2 else None,
        welfare_ratio_v1=expected_welfare / v1 if v1 else None,
        hit_v1=Fraction(hits_v1, count),
        hit_v2=Fraction(hits_v2, count),
        trials_or_permutations=factorial(n),
    )
    if use_cache:
        cache_put(key, report.to_dict())
    return report


def _sample(mechanism, prediction, values, intervals, tie_break, seed, trials):
    results = []
    for trial in trials:
        assignment = rng_for(seed, trial).permutation(len(values))
        instance = apply_matching(values, intervals, Matching(assignment), tie_break)
        outcome = mechanism.run(instance, prediction)
        results.append((outcome.revenue, outcome.welfare))
    return results


def _sample_star(args):
    return _sample(*args)


def mc_expected_revenue(
    values,
    intervals,
    params,
    prediction,
    trials,
    seed,
    mechanism=None,
    tie_break=None,
    workers=None,
):
    """Monte Carlo estimate over uniformly random matchings.

    Trial t draws its matching from the stream (seed, t), so the estimate only
    depends on (seed, trials). The mean is exact; standard errors use numpy.
    """
    if trials < 1:
        raise AuctionLabInputException("trials must be positive")
    values, intervals = _prepare(values, intervals)
    prediction = as_prediction(prediction)
    mechanism = _mechanism(params, mechanism)

    workers = min(worker_count(workers), trials)
    chunks = np.array_split(np.arange(trials), workers)
    jobs = [
        (
            mechanism,
            prediction,
            values,
            intervals,
            tie_break,
            seed,
            [int(t) for t in chunk],
        )
        for chunk in chunks
    ]
    log.info("monte carlo: %d trials, seed=%d, %d workers", trials, seed, workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(_sample_star, jobs))
    else:
        parts = [_sample_star(job) for job in jobs]
    samples = [s for part in parts for s in part]

    revenues = np.array([float(r) for r, _ in samples])
    welfares = np.array([float(w) for _, w in samples])
    expected_revenue = sum((r for r, _ in samples), Fraction(0)) / trials
    expected_welfare = sum((w for _, w in samples), Fraction(0)) / trials
    revenue_stderr = welfare_stderr = 0.0
    if trials > 1:
        revenue_stderr = float(np.std(revenues, ddof=1) / np.sqrt(trials))
        welfare_stderr = float(np.std(welfares, ddof=1) / np.sqrt(trials))

    v1, v2 = benchmarks(values)
    return EvalReport(
        mode="mc",
        mechanism=mechanism.name,
        n=len(values),
        alpha=mechanism.alpha,
        gamma=mechanism.gamma,
        prediction=prediction.value,
        seed=seed,
        expected_revenue=expected_revenue,
        revenue_stderr=revenue_stderr,
        expected_welfare=expected_welfare,
        welfare_stderr=welfare_stderr,
        benchmark_v1=v1,
        benchmark_v2=v2,
        ratio_v1=expected_revenue / v1 if v1 else None,
        ratio_v2=expected_revenue / v2 if v2 else None,
        welfare_ratio_v1=expected_welfare / v1 if v1 else None,
        hit_v1=Fraction(int(np.sum(revenues >= float(v1))), trials),
        hit_v2=Fraction(int(np.sum(revenues >= float(v2))), trials),
        trials_or_permutations=trials,
    )


def consistency_ratio(values, intervals, params, **options):
    """Expected revenue over v(1) when the prediction is exactly v(1)."""
    v1, _ = benchmarks(values)
    if v1 == 0:
        raise AuctionLabInputException("consistency needs a positive value")
    report = exact_expected_revenue(values, intervals, params, v1, **options)
    return report["ratio_v1"]


def default_scenarios(values, delta=DEFAULT_DELTA):
    """Predictions covering every region between and around v(2) and v(1)."""
    v1, v2 = benchmarks(values)
    delta = to_rational(delta)
    candidates = {
        v1 + 1,
        v2 / 2,
        (v1 + v2) / 2,
        Fraction(0),
        v2 * (1 - delta),
        v1,
        v1 * (1 + delta),
    }
    return [as_prediction(v) for v in sorted(candidates)]


def robustness_profile(values, intervals, params, scenarios=None, **options):
    """Expected revenue over v(2) for each prediction scenario."""
    _, v2 = benchmarks(values)
    if v2 == 0:
        raise AuctionLabInputException("robustness needs a positive v(2)")
    if scenarios is None:
        scenarios = default_scenarios(values)
    scenarios = [as_prediction(s) for s in scenarios]
    if not scenarios:
        raise AuctionLabInputException("at least one scenario is required")
    profile = {}
    for scenario in scenarios:
        report = exact_expected_revenue(
            values, intervals, params, scenario, **options
        )
        profile[scenario.value] = report["ratio_v2"]
        log.debug("scenario %s: ratio %s", scenario.value, profile[scenario.value])
    return profile


def robustness_ratio(values, intervals, params, scenarios=None, **options):
    """Worst expected revenue over v(2) across the prediction scenarios."""
    return min(
        robustness_profile(values, intervals, params, scenarios, **options).values()
    )


def prediction_quality(prediction, v1):
    prediction = as_prediction(prediction).value
    v1 = to_rational(v1)
    if prediction <= 0 or v1 <= 0:
        raise AuctionLabInputException(
            "prediction quality needs a positive prediction and v(1)"
        )
    return PredictionQuality(min(prediction / v1, v1 / prediction))


def robustness_floor(n, alpha, mode="exact"):
    """Guaranteed fraction of v(2): the finite-n expression or (1 - alpha^2)/4.
    """
    alpha = to_rational(alpha)
    if mode == "asymptotic":
        return (1 - alpha ** 2) / 4
    if mode != "exact":
        raise AuctionLabInputException("floor mode must be exact or asymptotic")
    if n < 2:
        return Fraction(0)
    i1, i2 = milestones(n, alpha)
    return Fraction(min(i1 * (n - i1), i2 * (n - i2)), n * (n - 1))


def error_tolerant_check(
    values, intervals, alpha, gamma, prediction, floor_mode="exact", **options
):
    """Checks the Error-Tolerant revenue guarantee on one instance.

    The consistency part, alpha * gamma * q * v(1) with the realised phase
    length (i2 - i1)/n in place of alpha, is only asserted when q >= gamma.
    """
    values, intervals = _prepare(values, intervals)
    n = len(values)
    params = AuctionParams(alpha, gamma)
    prediction = as_prediction(prediction)
    v1, v2 = benchmarks(values)
    q = Fraction(0)
    if prediction.value > 0 and v1 > 0:
        q = prediction_quality(prediction, v1).q

    report = exact_expected_revenue(values, intervals, params, prediction, **options)
    revenue = report["expected_revenue"]
    i1, i2 = milestones(n, params.alpha)
    phase_share = Fraction(i2 - i1, n)
    checked = q >= params.gamma
    bound = phase_share * params.gamma * q * v1
    floor = robustness_floor(n, params.alpha, floor_mode) * v2
    holds = revenue >= floor and (not checked or revenue >= bound)
    if not holds:
        log.warning(
            "error-tolerant guarantee fails: revenue=%s bound=%s floor=%s",
            revenue,
            bound,
            floor,
        )
    return ErrorTolerantReport(
        n=n,
        alpha=params.alpha,
        gamma=params.gamma,
        prediction=prediction.value,
        q=q,
        expected_revenue=revenue,
        consistency_checked=checked,
        consistency_bound=bound,
        consistency_margin=revenue - bound,
        floor_mode=floor_mode,
        robustness_floor=floor,
        robustness_margin=revenue - floor,
        holds=holds,
    )


def tradeoff_sweep(
    n,
    alpha_grid=DEFAULT_ALPHA_GRID,
    instance_family="disjoint-canonical",
    eps=Fraction(1, 2),
    **options
):
    """Consistency and robustness of the Three-Phase auction across alphas.

    Consistency is measured on (1, 0, ..., 0) with a correct prediction and
    robustness on (1, eps, 0, ..., 0) over the default scenarios, both on
    unit-time disjoint intervals.
    """
    if instance_family != "disjoint-canonical":
        raise AuctionLabInputException(
            "unknown instance family %r" % instance_family
        )
    intervals = disjoint_intervals(n)
    consistency_values, truth = canonical_consistency_instance(n)
    robustness_values, _ = canonical_robustness_instance(n, eps)
    rows = []
    for alpha in alpha_grid:
        alpha = to_rational(alpha)
        if not in_w_n(n, alpha):
            log.warning("skipping alpha=%s: not in W_%d", alpha, n)
            continue
        params = AuctionParams(alpha)
        consistency = exact_expected_revenue(
            consistency_values, intervals, params, truth, **options
        )["ratio_v1"]
        robustness = robustness_ratio(
            robustness_values, intervals, params, **options
        )
        row = SweepRow(
            alpha=alpha,
            consistency=consistency,
            robustness=robustness,
            floor=robustness_floor(n, alpha, "asymptotic"),
            n=n,
        )
        log.info("sweep row: %s", row)
        rows.append(row)
    return rows
