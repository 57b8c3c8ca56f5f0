# coding=utf-8

"""Step-rule auction families on sequential instances.

A PA auction picks, at every step i, one of: never sell, post
max(prediction, j-th highest value seen), or post the j-th highest value
seen, with 1 <= j < i. PM auctions restrict j to 1. Auctions are scored by
counting orderings of two canonical value profiles:

  consistency  (1, 0, ..., 0) with prediction 1; orderings where the
               prediction is posted to the highest bidder and accepted.
  robustness   (1, eps, 0, ..., 0); orderings where the highest bidder buys
               at exactly eps, counted separately for predictions above
               v(1), below v(2) and between them.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import product
from math import factorial

from auctionlab import log
from auctionlab.core import as_prediction, in_w_n
from auctionlab.engine import DEPARTURE, AllocationResult, event_schedule
from auctionlab.exceptions import AuctionLabInputException
from auctionlab.mechanisms import Mechanism
from auctionlab.reports import HardnessReport, InterchangeReport, ThresholdReport
from auctionlab.utils import INFINITY, ensure_enumerable, format_rational, to_rational

__all__ = [
    "DEFAULT_EPS",
    "INVERSIONS",
    "FamilyScore",
    "PAAuction",
    "PARule",
    "PMAuction",
    "PMMechanism",
    "PMRule",
    "all_pa_auctions",
    "all_pm_auctions",
    "hardness_bound",
    "hardness_scan",
    "interchange",
    "optimal_thresholds",
    "pa_run",
    "pa_to_pm",
    "pm_run",
    "scenario_predictions",
    "score",
    "three_phase_pm",
    "verify_interchange",
    "verify_pa_dominance",
]

DEFAULT_EPS = Fraction(1, 2)
OVER = "over"
UNDER = "under"
INTERMEDIATE = "intermediate"


class PMRule(Enum):
    NEVER = "never"
    PRED_OR_MAX = "pred-or-max"
    MAX_SEEN = "max-seen"

    def __str__(self):
        return self.value


INVERSIONS = {
    (PMRule.MAX_SEEN, PMRule.PRED_OR_MAX),
    (PMRule.MAX_SEEN, PMRule.NEVER),
    (PMRule.PRED_OR_MAX, PMRule.NEVER),
}


@dataclass(frozen=True)
class PARule:
    """A PA step rule; `j` selects the j-th highest value seen."""

    kind: PMRule
    j: int = None

    def __post_init__(self):
        if self.kind is PMRule.NEVER:
            if self.j is not None:
                raise AuctionLabInputException("a never rule takes no j")
        elif self.j is None or self.j < 1:
            raise AuctionLabInputException("%s needs j >= 1" % self.kind)

    def __str__(self):
        if self.kind is PMRule.NEVER:
            return "never"
        name = "pred-or-jth" if self.kind is PMRule.PRED_OR_MAX else "jth-seen"
        return "%s(%d)" % (name, self.j)

    @classmethod
    def never(cls):
        return cls(PMRule.NEVER)

    @classmethod
    def pred_or_jth(cls, j):
        return cls(PMRule.PRED_OR_MAX, j)

    @classmethod
    def jth_seen(cls, j):
        return cls(PMRule.MAX_SEEN, j)


@dataclass(frozen=True)
class PMAuction:
    rules: tuple

    def __post_init__(self):
        rules = tuple(PMRule(r) for r in self.rules)
        if not rules:
            raise AuctionLabInputException("an auction needs at least one step")
        object.__setattr__(self, "rules", rules)

    @property
    def n(self):
        return len(self.rules)

    def __str__(self):
        return ",".join(str(r) for r in self.rules)


@dataclass(frozen=True)
class PAAuction:
    rules: tuple

    def __post_init__(self):
        rules = tuple(self.rules)
        if not rules:
            raise AuctionLabInputException("an auction needs at least one step")
        for step, rule in enumerate(rules, start=1):
            if not isinstance(rule, PARule):
                raise AuctionLabInputException("PA rules must be PARule values")
            if rule.j is not None and rule.j > step - 1:
                raise AuctionLabInputException(
                    "step %d cannot use j=%d" % (step, rule.j)
                )
        object.__setattr__(self, "rules", rules)

    @property
    def n(self):
        return len(self.rules)

    def __str__(self):
        return ",".join(str(r) for r in self.rules)


@dataclass(frozen=True)
class FamilyScore:
    c_count: int
    r_counts: dict
    n_factorial: int

    @property
    def consistency(self):
        return Fraction(self.c_count, self.n_factorial)

    @property
    def robustness(self):
        return Fraction(min(self.r_counts.values()), self.n_factorial)

    def scenario_robustness(self, scenario):
        return Fraction(self.r_counts[scenario], self.n_factorial)


def _jth_highest(prefix, j):
    if len(prefix) < j:
        return Fraction(0)
    return sorted(prefix, reverse=True)[j - 1]


def _run(rules, ordering, prediction):
    prefix = []
    for step, (rule, value) in enumerate(zip(rules, ordering), start=1):
        kind, j = (rule, 1) if isinstance(rule, PMRule) else (rule.kind, rule.j)
        if kind is not PMRule.NEVER:
            seen = _jth_highest(prefix, j)
            price = max(prediction, seen) if kind is PMRule.PRED_OR_MAX else seen
            if value >= price:
                return True, step, price
        prefix.append(value)
    return False, None, INFINITY


def _checked_run(auction, kind, ordering, prediction):
    if not isinstance(auction, kind):
        raise AuctionLabInputException(
            "expected a %s, got %s" % (kind.__name__, type(auction).__name__)
        )
    if len(ordering) != auction.n:
        raise AuctionLabInputException("ordering length must equal n")
    ordering = [to_rational(v) for v in ordering]
    return _run(auction.rules, ordering, as_prediction(prediction).value)


def pm_run(auction, ordering, prediction):
    """First step whose posted price is accepted, as (sold, step, price)."""
    return _checked_run(auction, PMAuction, ordering, prediction)


def pa_run(auction, ordering, prediction):
    """Like `pm_run` with j-th highest thresholds."""
    return _checked_run(auction, PAAuction, ordering, prediction)


def scenario_predictions(eps=DEFAULT_EPS):
    eps = to_rational(eps)
    return {OVER: Fraction(2), UNDER: eps / 2, INTERMEDIATE: (1 + eps) / 2}


def score(auction, eps=DEFAULT_EPS, cap=None):
    """Consistency and robustness counts over all n! orderings.

    Orderings are enumerated by the positions of the non-zero values and
    weighted by the number of arrangements of the zeros.
    """
    n = auction.n
    if n < 2:
        raise AuctionLabInputException("scoring needs n >= 2")
    ensure_enumerable(n, cap, "family scoring")
    eps = to_rational(eps)
    rules = auction.rules

    c_count = 0
    for top in range(n):
        ordering = [Fraction(0)] * n
        ordering[top] = Fraction(1)
        sold, step, price = _run(rules, ordering, Fraction(1))
        if sold and step == top + 1 and price == 1:
            c_count += 1

    r_counts = {}
    for scenario, prediction in scenario_predictions(eps).items():
        count = 0
        for top, second in product(range(n), repeat=2):
            if top == second:
                continue
            ordering = [Fraction(0)] * n
            ordering[top] = Fraction(1)
            ordering[second] = eps
            sold, step, price = _run(rules, ordering, prediction)
            if sold and step == top + 1 and price == eps:
                count += 1
        r_counts[scenario] = count * factorial(n - 2)
    return FamilyScore(c_count * factorial(n - 1), r_counts, factorial(n))


def pa_to_pm(auction):
    """Replaces every j-th highest threshold by the highest value seen."""
    return PMAuction(tuple(rule.kind for rule in auction.rules))


def interchange(auction, i):
    """Swaps the inverted rules at 0-based positions i and i + 1."""
    if not 0 <= i < auction.n - 1:
        raise AuctionLabInputException("position %d out of range" % i)
    pair = (auction.rules[i], auction.rules[i + 1])
    if pair not in INVERSIONS:
        raise AuctionLabInputException(
            "(%s, %s) at position %d is not an inversion" % (pair[0], pair[1], i)
        )
    rules = list(auction.rules)
    rules[i], rules[i + 1] = rules[i + 1], rules[i]
    return PMAuction(tuple(rules))


def three_phase_pm(n, i1, i2):
    """Never for i1 steps, prediction-or-max up to step i2, max-seen after."""
    if not 0 <= i1 <= i2 <= n:
        raise AuctionLabInputException("thresholds must satisfy 0 <= i1 <= i2 <= n")
    return PMAuction(
        (PMRule.NEVER,) * i1
        + (PMRule.PRED_OR_MAX,) * (i2 - i1)
        + (PMRule.MAX_SEEN,) * (n - i2)
    )


def all_pm_auctions(n):
    for rules in product(list(PMRule), repeat=n):
        yield PMAuction(rules)


def all_pa_auctions(n):
    choices = []
    for step in range(1, n + 1):
        options = [PARule.never()]
        for j in range(1, step):
            options.append(PARule.pred_or_jth(j))
            options.append(PARule.jth_seen(j))
        choices.append(options)
    for rules in product(*choices):
        yield PAAuction(rules)


def _regressions(before, after):
    return [
        s for s in before.r_counts if after.r_counts[s] < before.r_counts[s]
    ]


def verify_interchange(n, eps=DEFAULT_EPS, cap=None):
    """Checks every inversion swap over all 3^n PM auctions.

    A violation is a swap lowering the consistency count or the worst
    scenario count; per-scenario decreases are listed as regressions.
    """
    ensure_enumerable(n, cap, "interchange verification")
    scores = {}

    def _score(auction):
        if auction.rules not in scores:
            scores[auction.rules] = score(auction, eps, cap)
        return scores[auction.rules]

    auctions = swaps = 0
    violations = []
    regressions = []
    for auction in all_pm_auctions(n):
        auctions += 1
        for i in range(n - 1):
            if (auction.rules[i], auction.rules[i + 1]) not in INVERSIONS:
                continue
            swaps += 1
            before = _score(auction)
            after = _score(interchange(auction, i))
            witness = {
                "rules": str(auction),
                "position": i,
                "c_before": before.c_count,
                "c_after": after.c_count,
                "r_before": before.r_counts,
                "r_after": after.r_counts,
            }
            if (
                after.c_count < before.c_count
                or min(after.r_counts.values()) < min(before.r_counts.values())
            ):
                log.warning("interchange violation: %s", witness)
                violations.append(witness)
            scenarios = _regressions(before, after)
            if scenarios:
                log.debug("scenario regression at %s: %s", witness, scenarios)
                regressions.append(dict(witness, scenarios=scenarios))
    return InterchangeReport(
        n=n,
        auctions=auctions,
        swaps_checked=swaps,
        violations=violations,
        scenario_regressions=regressions,
        holds=not violations,
    )


def verify_pa_dominance(n, eps=DEFAULT_EPS, cap=None):
    """Compares every PA auction with its PM image.

    Returns (violations, scenario_regressions) as lists of witness dicts.
    """
    ensure_enumerable(n, cap, "PA dominance verification")
    pm_scores = {}
    violations = []
    regressions = []
    for auction in all_pa_auctions(n):
        image = pa_to_pm(auction)
        if image.rules not in pm_scores:
            pm_scores[image.rules] = score(image, eps, cap)
        before = score(auction, eps, cap)
        after = pm_scores[image.rules]
        witness = {"rules": str(auction), "image": str(image)}
        if (
            after.c_count < before.c_count
            or min(after.r_counts.values()) < min(before.r_counts.values())
        ):
            violations.append(witness)
        scenarios = _regressions(before, after)
        if scenarios:
            regressions.append(dict(witness, scenarios=scenarios))
    return violations, regressions


def hardness_bound(n, alpha):
    """(n / (n - 1)) (1 - alpha^2) / 4."""
    alpha = to_rational(alpha)
    return Fraction(n, n - 1) * (1 - alpha ** 2) / 4


def _check_w_n(n, alpha):
    if n < 2:
        raise AuctionLabInputException("n must be at least 2")
    if not in_w_n(n, alpha):
        msg = "alpha=%s is not in W_%d" % (alpha, n)
        log.error(msg)
        raise AuctionLabInputException(msg)


def optimal_thresholds(n, alpha, eps=DEFAULT_EPS, cap=None):
    """Best three-phase PM thresholds with at least alpha * n prediction steps.
    """
    alpha = to_rational(alpha)
    _check_w_n(n, alpha)
    width = alpha * n
    formula = (int((1 - alpha) * n / 2), int((1 + alpha) * n / 2))
    best = None
    robustness = {}
    for i1 in range(n + 1):
        for i2 in range(i1, n + 1):
            if i2 - i1 < width:
                continue
            value = score(three_phase_pm(n, i1, i2), eps, cap).robustness
            robustness[i1, i2] = value
            if best is None or value > robustness[best]:
                best = (i1, i2)
    top = robustness[best]
    if robustness.get(formula) == top:
        best = formula
    bound = hardness_bound(n, alpha)
    attained = robustness.get(formula) == top
    return ThresholdReport(
        n=n,
        alpha=alpha,
        i1_star=best[0],
        i2_star=best[1],
        robustness=top,
        bound=bound,
        attained_at_formula=attained,
        holds=attained and top == bound,
    )


def _frontier(rows):
    frontier = {}
    for consistency, robustness in rows:
        frontier[consistency] = max(frontier.get(consistency, robustness), robustness)
    points = []
    best = None
    for consistency in sorted(frontier, reverse=True):
        if best is None or frontier[consistency] > best:
            best = frontier[consistency]
            points.append((consistency, best))
    return sorted(points)


def _scenario_flags(consistent, best):
    """Auctions leading a single scenario while trailing on the minimum.

    These are the cases where ranking by one prediction scenario disagrees
    with ranking by the worst one.
    """
    flags = []
    if not consistent:
        return flags
    for scenario in consistent[0][1].r_counts:
        top = max(result.r_counts[scenario] for _, result in consistent)
        for auction, result in consistent:
            if result.r_counts[scenario] == top and result.robustness < best:
                log.debug("%s leads scenario %s only", auction, scenario)
                flags.append(
                    {
                        "rules": str(auction),
                        "scenario": scenario,
                        "scenario_robustness": format_rational(
                            result.scenario_robustness(scenario)
                        ),
                        "robustness": format_rational(result.robustness),
                    }
                )
    return flags


def hardness_scan(n, alpha, eps=DEFAULT_EPS, cap=None):
    """Scores all 3^n PM auctions and checks that every alpha-consistent one
    stays within the robustness bound.
    """
    alpha = to_rational(alpha)
    _check_w_n(n, alpha)
    ensure_enumerable(n, cap, "hardness scan")
    bound = hardness_bound(n, alpha)
    rows = []
    scored = []
    consistent = []
    violations = []
    best = None
    for auction in all_pm_auctions(n):
        result = score(auction, eps, cap)
        scored.append((result.consistency, result.robustness))
        rows.append(
            {
                "rules": str(auction),
                "consistency": format_rational(result.consistency),
                "robustness": format_rational(result.robustness),
            }
        )
        if result.consistency >= alpha:
            consistent.append((auction, result))
            if best is None or result.robustness > best:
                best = result.robustness
            if result.robustness > bound:
                violations.append(rows[-1])
    frontier = [
        {"consistency": format_rational(c), "max_robustness": format_rational(r)}
        for c, r in _frontier(scored)
    ]
    flags = _scenario_flags(consistent, best)
    log.info("hardness scan n=%d alpha=%s: %d violations", n, alpha, len(violations))
    return HardnessReport(
        n=n,
        alpha=alpha,
        bound=bound,
        best_robustness=best,
        rows=rows,
        frontier=frontier,
        violations=violations,
        scenario_flags=flags,
        holds=not violations,
    )


class PMMechanism(Mechanism):
    """Runs a PM auction on an instance, stepping through bidders in
    departure order; meant for instances with disjoint intervals.
    """

    name = "pm"

    def __init__(self, **options):
        options.setdefault("alpha", 0)
        super(PMMechanism, self).__init__(**options)
        auction = options.get("auction")
        if not isinstance(auction, PMAuction):
            raise AuctionLabInputException("PMMechanism requires a PMAuction")
        self._auction = auction

    @property
    def auction(self):
        return self._auction

    @property
    def options(self):
        options = super(PMMechanism, self).options
        options["rules"] = str(self._auction)
        return options

    def alloc(self, instance, prediction):
        if instance.n != self._auction.n:
            raise AuctionLabInputException("auction and instance sizes differ")
        order = [b for _, kind, b in event_schedule(instance) if kind == DEPARTURE]
        ordering = [instance[b].value for b in order]
        sold, step, price = _run(
            self._auction.rules, ordering, as_prediction(prediction).value
        )
        if not sold:
            return AllocationResult(None, price)
        winner = order[step - 1]
        return AllocationResult(winner, price, False, None, instance[winner].departure)

    def payment(self, instance, prediction, result):
        return result.threshold
