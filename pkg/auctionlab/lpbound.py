# coding=utf-8

"""Exact LP certificates bounding the probability of selecting the highest
value while pricing at the second highest.

The primal is

    max  sum_i c_i x_i,   c_i = (i - 1) i / (n (n - 1))
    s.t. i x_i <= 1 - sum_{j<i} x_j,   x >= 0

and its dual is

    min  sum_i y_i
    s.t. i y_i + sum_{j>i} y_j >= c_i,   y >= 0.

Vectors are 0-indexed in Python; position k holds step i = k + 1.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import ceil, factorial

import numpy as np

from auctionlab import log
from auctionlab.core import rng_for
from auctionlab.exceptions import (
    AuctionLabCertificateException,
    AuctionLabInputException,
)
from auctionlab.utils import ensure_enumerable, format_rational, to_rational

__all__ = [
    "DualCertificate",
    "LPSolution",
    "StoppingRule",
    "dual_bound",
    "dual_violations",
    "objective_coefficients",
    "explicit_dual",
    "primal_violations",
    "random_rule",
    "rank_rule_conditional_check",
    "rule_stats",
    "rule_stats_enumerated",
    "scan_certificates",
    "solve_primal",
]


def _check_n(n):
    if n < 2:
        raise AuctionLabInputException("the LP needs n >= 2")


def objective_coefficients(n):
    """c_i = (i - 1) i / (n (n - 1)) for i = 1..n."""
    _check_n(n)
    return tuple(Fraction((i - 1) * i, n * (n - 1)) for i in range(1, n + 1))


def dual_bound(n):
    return Fraction(1, 4) + Fraction(2, n)


@dataclass(frozen=True)
class StoppingRule:
    """Stop at step i with probability probs[i - 1] when the current value is
    the highest seen so far; never stop otherwise.
    """

    probs: tuple

    def __post_init__(self):
        probs = tuple(to_rational(s) for s in self.probs)
        if any(not 0 <= s <= 1 for s in probs):
            raise AuctionLabInputException("stopping probabilities must lie in [0, 1]")
        object.__setattr__(self, "probs", probs)

    def __len__(self):
        return len(self.probs)


@dataclass(frozen=True)
class LPSolution:
    n: int
    x: tuple
    objective: Fraction
    threshold: int = None

    def to_dict(self):
        return {
            "n": self.n,
            "x": [format_rational(v) for v in self.x],
            "objective": format_rational(self.objective),
            "threshold": self.threshold,
            "bound": format_rational(dual_bound(self.n)),
        }


@dataclass(frozen=True)
class DualCertificate:
    """Dual solution y = numerators / denominator, kept as integers."""

    n: int
    numerators: tuple
    denominator: int
    clamped: bool = True

    @property
    def y(self):
        return tuple(Fraction(v, self.denominator) for v in self.numerators)

    @property
    def objective(self):
        return Fraction(sum(self.numerators), self.denominator)

    @property
    def bound(self):
        return dual_bound(self.n)

    @property
    def feasible(self):
        return not dual_violations(self)

    def to_dict(self):
        return {
            "n": self.n,
            "y": [format_rational(v) for v in self.y],
            "objective": format_rational(self.objective),
            "bound": format_rational(self.bound),
            "feasible": self.feasible,
        }


def _dual_numerators(n, clamp):
    support = ceil(n / 2)
    numerators = []
    for i in range(1, n + 1):
        value = 2 * i - n - 1 if i >= support else 0
        numerators.append(max(0, value) if clamp else value)
    return tuple(numerators)


def dual_violations(certificate):
    """1-based steps whose dual constraint or sign condition fails."""
    n = certificate.n
    scale = n * (n - 1)
    violations = []
    suffix = 0
    for i in range(n, 0, -1):
        y_i = certificate.numerators[i - 1]
        lhs = (i * y_i + suffix) * scale
        rhs = (i - 1) * i * certificate.denominator
        if y_i < 0 or lhs < rhs:
            violations.append(i)
        suffix += y_i
    return sorted(violations)


def explicit_dual(n, clamp=True):
    """Dual solution y_i = max(0, (2i - n - 1) / (n (n - 1))) on i >= ceil(n/2).

    With `clamp=False` the negative coordinate at i = n/2 for even n is kept.
    Raises AuctionLabCertificateException when the clamped solution fails an
    exact feasibility check.
    """
    _check_n(n)
    certificate = DualCertificate(
        n, _dual_numerators(n, clamp), n * (n - 1), clamp
    )
    if clamp:
        violations = dual_violations(certificate)
        if violations:
            msg = "dual certificate for n=%d violates constraint %d" % (
                n,
                violations[0],
            )
            log.error(msg)
            raise AuctionLabCertificateException(msg)
    return certificate


def scan_certificates(n_max, n_min=2):
    """Checks the clamped certificate for every n in [n_min, n_max].

    Uses int64 arithmetic on the scaled numerators; returns the list of
    (n, reason) failures.
    """
    failures = []
    for n in range(max(2, n_min), n_max + 1):
        steps = np.arange(1, n + 1, dtype=np.int64)
        support = ceil(n / 2)
        y = np.where(steps >= support, 2 * steps - n - 1, 0)
        y = np.maximum(y, 0)
        suffix = np.cumsum(y[::-1])[::-1] - y
        if not np.all(steps * y + suffix >= steps * (steps - 1)):
            failures.append((n, "infeasible"))
            continue
        objective = Fraction(int(y.sum()), n * (n - 1))
        if objective > dual_bound(n):
            failures.append((n, "objective %s above bound" % objective))
    log.info(
        "scanned certificates for n in [%d, %d]: %d failures",
        n_min,
        n_max,
        len(failures),
    )
    return failures


def primal_violations(n, x):
    """1-based steps where x is negative or i x_i exceeds the remaining mass."""
    violations = []
    seen = Fraction(0)
    for i, x_i in enumerate(x, start=1):
        if x_i < 0 or i * x_i > 1 - seen:
            violations.append(i)
        seen += x_i
    return violations


def _threshold_solution(n, k):
    x = [Fraction(0)] * n
    if k == 1:
        x[0] = Fraction(1)
    else:
        for i in range(k, n + 1):
            x[i - 1] = Fraction(k - 1, i * (i - 1))
    return tuple(x)


def solve_primal(n):
    """Optimal primal solution over the threshold family, certified exactly.

    Stopping at the first record after step k - 1 gives
    x_i = (k - 1) / (i (i - 1)) for i >= k.
    """
    _check_n(n)
    c = objective_coefficients(n)
    best = None
    for k in range(1, n + 1):
        x = _threshold_solution(n, k)
        objective = sum((ci * xi for ci, xi in zip(c, x)), Fraction(0))
        if best is None or objective > best.objective:
            best = LPSolution(n, x, objective, k)
    if primal_violations(n, best.x):
        msg = "primal solution for n=%d is infeasible" % n
        log.error(msg)
        raise AuctionLabCertificateException(msg)
    dual = explicit_dual(n)
    if best.objective > dual.objective:
        msg = "primal objective %s exceeds dual objective %s" % (
            best.objective,
            dual.objective,
        )
        log.error(msg)
        raise AuctionLabCertificateException(msg)
    return best


def _rule_for(rule, n):
    if not isinstance(rule, StoppingRule):
        rule = StoppingRule(rule)
    if len(rule) != n:
        raise AuctionLabInputException(
            "rule has %d probabilities for n=%d" % (len(rule), n)
        )
    return rule


def rule_stats(rule, n):
    """Stopping distribution x and success probability of a rank-based rule.

    A step is a record with probability 1/i independently of earlier steps,
    which gives x_i = (s_i / i) prod_{j<i} (1 - s_j / j).
    """
    rule = _rule_for(rule, n)
    c = objective_coefficients(n)
    x = []
    survive = Fraction(1)
    for i, s in enumerate(rule.probs, start=1):
        x.append(survive * s / i)
        survive *= 1 - s / i
    success = sum((ci * xi for ci, xi in zip(c, x)), Fraction(0))
    return tuple(x), success


def _stop_profile(rule, ordering):
    """Probability of stopping at each step on one arrival order."""
    stops = []
    survive = Fraction(1)
    best = None
    for position, value in enumerate(ordering):
        if best is None or value > best:
            best = value
            s = rule.probs[position]
            stops.append(survive * s)
            survive *= 1 - s
        else:
            stops.append(Fraction(0))
    return stops


def rule_stats_enumerated(rule, n, cap=None):
    """Same as `rule_stats`, averaging over all n! arrival orders."""
    rule = _rule_for(rule, n)
    _check_n(n)
    ensure_enumerable(n, cap, "stopping-rule enumeration")
    x = [Fraction(0)] * n
    success = Fraction(0)
    for ordering in permutations(range(1, n + 1)):
        stops = _stop_profile(rule, ordering)
        top = ordering.index(n)
        second = ordering.index(n - 1)
        for position, p in enumerate(stops):
            x[position] += p
        if second < top:
            success += stops[top]
    total = factorial(n)
    return tuple(v / total for v in x), success / total


def rank_rule_conditional_check(rule, n, cap=None):
    """Compares, for each step i >= 2, the stopping probability given a record
    at i with the same probability further conditioned on the highest value
    arriving at i and the second highest before it.

    Returns (holds, rows) with rows mapping i to (conditioned, unconditioned).
    """
    rule = _rule_for(rule, n)
    _check_n(n)
    ensure_enumerable(n, cap, "conditional check")
    record_mass = [Fraction(0)] * n
    record_count = [0] * n
    top_mass = [Fraction(0)] * n
    top_count = [0] * n
    for ordering in permutations(range(1, n + 1)):
        stops = _stop_profile(rule, ordering)
        running = 0
        second = ordering.index(n - 1)
        for position, value in enumerate(ordering):
            if value > running:
                running = value
                record_mass[position] += stops[position]
                record_count[position] += 1
                if value == n and second < position:
                    top_mass[position] += stops[position]
                    top_count[position] += 1
    rows = {}
    for position in range(1, n):
        if not top_count[position]:
            continue
        rows[position + 1] = (
            top_mass[position] / top_count[position],
            record_mass[position] / record_count[position],
        )
    holds = all(lhs == rhs for lhs, rhs in rows.values())
    if not holds:
        log.warning("conditional stopping probabilities differ: %s", rows)
    return holds, rows


def random_rule(n, seed, denominator=8):
    """Random rule with probabilities k / denominator."""
    draws = rng_for(seed).integers(0, denominator + 1, size=n)
    return StoppingRule(tuple(Fraction(int(k), denominator) for k in draws))
