# coding=utf-8

"""Report data classes."""

import re
from collections.abc import MutableMapping
from fractions import Fraction

from auctionlab.core import BidderType
from auctionlab.engine import EventTrace
from auctionlab.utils import (
    INFINITY,
    clean_dict,
    format_decimal,
    format_rational,
    to_rational,
)

__all__ = [
    "DeviationReport",
    "ErrorTolerantReport",
    "EvalReport",
    "HardnessReport",
    "InterchangeReport",
    "Report",
    "SweepRow",
    "ThresholdReport",
]


class Report(MutableMapping):
    """Base Report class.

    A mapping restricted to `fields_accepted`; fields listed in
    `fields_rational` are stored as exact Fractions.
    """

    fields_accepted = set()
    fields_rational = set()

    _fallback_str = "[empty report]"
    _default_format = ""

    def __init__(self, **params):
        self._dict = {k: None for k in self.fields_accepted}
        self.update(params)

    def __delitem__(self, key):
        self[key] = None

    def __format__(self, format_spec):
        format_spec = format_spec or self._default_format
        s = re.sub(r"{(\w+)}", self._format_repl, format_spec)
        return re.sub(r"\s+", " ", s).strip()

    def __iter__(self):
        return iter(sorted(k for k, v in self._dict.items() if v is not None))

    def __getitem__(self, key):
        # Case insensitive keys
        return self._dict.get(key.lower())

    def __len__(self):
        return len([v for v in self._dict.values() if v is not None])

    def __repr__(self):
        return "<%s: %s>" % (self.__class__.__name__, dict(self.items()))

    def __setitem__(self, key, value):
        key = key.lower()
        if key not in self.fields_accepted:
            raise KeyError(
                "'%s' cannot be set for %s" % (key, self.__class__.__name__)
            )
        if key in self.fields_rational and value is not None:
            if not (isinstance(value, float) and value == INFINITY):
                value = to_rational(value)
        self._dict[key] = value

    def __str__(self):
        return self.__format__(None) or self._fallback_str

    def _format_repl(self, mobj):
        value = self[mobj.group(1)]
        if value is None:
            return ""
        if isinstance(value, (Fraction, float)):
            return format_decimal(value)
        return str(value)

    @property
    def violated(self):
        """Whether the report witnesses a failed property."""
        return self.get("holds") is False

    def to_dict(self):
        """JSON-ready dict; rationals become "p/q" strings."""
        content = {}
        for key, value in self.items():
            if isinstance(value, Report):
                value = value.to_dict()
            elif isinstance(value, BidderType):
                value = {
                    "arrival": format_rational(value.arrival),
                    "departure": format_rational(value.departure),
                    "value": format_rational(value.value),
                }
            elif isinstance(value, EventTrace):
                value = value.to_json_lines().splitlines()
            elif isinstance(value, (list, tuple)):
                value = [
                    v.to_dict() if isinstance(v, Report) else v for v in value
                ]
            content[key] = value
        return clean_dict(content)


class EvalReport(Report):
    """Expected revenue and welfare of a mechanism over the random matching.
    """

    fields_accepted = {
        "mode",
        "mechanism",
        "n",
        "alpha",
        "gamma",
        "prediction",
        "seed",
        "expected_revenue",
        "revenue_stderr",
        "expected_welfare",
        "welfare_stderr",
        "benchmark_v1",
        "benchmark_v2",
        "ratio_v1",
        "ratio_v2",
        "welfare_ratio_v1",
        "hit_v1",
        "hit_v2",
        "trials_or_permutations",
    }
    fields_rational = {
        "alpha",
        "gamma",
        "prediction",
        "expected_revenue",
        "expected_welfare",
        "benchmark_v1",
        "benchmark_v2",
        "ratio_v1",
        "ratio_v2",
        "welfare_ratio_v1",
        "hit_v1",
        "hit_v2",
    }
    _default_format = (
        "{mode} revenue={expected_revenue} welfare={expected_welfare} "
        "ratio_v1={ratio_v1} ratio_v2={ratio_v2}"
    )


class SweepRow(Report):
    fields_accepted = {"alpha", "consistency", "robustness", "floor", "n"}
    fields_rational = {"alpha", "consistency", "robustness", "floor"}
    _default_format = (
        "alpha={alpha} consistency={consistency} robustness={robustness}"
    )

    @property
    def violated(self):
        return self["robustness"] < self["floor"]


class ErrorTolerantReport(Report):
    fields_accepted = {
        "n",
        "alpha",
        "gamma",
        "prediction",
        "q",
        "expected_revenue",
        "consistency_checked",
        "consistency_bound",
        "consistency_margin",
        "floor_mode",
        "robustness_floor",
        "robustness_margin",
        "holds",
    }
    fields_rational = {
        "alpha",
        "gamma",
        "prediction",
        "q",
        "expected_revenue",
        "consistency_bound",
        "consistency_margin",
        "robustness_floor",
        "robustness_margin",
    }
    _default_format = "q={q} revenue={expected_revenue} holds={holds}"


class DeviationReport(Report):
    """Most profitable unilateral misreport found for one bidder."""

    fields_accepted = {
        "bidder",
        "best_report",
        "truthful_utility",
        "best_utility",
        "gain",
        "candidates",
        "witness_trace",
    }
    fields_rational = {"truthful_utility", "best_utility", "gain"}
    _default_format = "bidder={bidder} gain={gain}"

    @property
    def violated(self):
        return self["gain"] > 0


class InterchangeReport(Report):
    fields_accepted = {
        "n",
        "auctions",
        "swaps_checked",
        "violations",
        "scenario_regressions",
        "holds",
    }
    _default_format = "n={n} swaps={swaps_checked} holds={holds}"


class ThresholdReport(Report):
    fields_accepted = {
        "n",
        "alpha",
        "i1_star",
        "i2_star",
        "robustness",
        "bound",
        "attained_at_formula",
        "holds",
    }
    fields_rational = {"alpha", "robustness", "bound"}
    _default_format = (
        "n={n} alpha={alpha} thresholds=({i1_star}, {i2_star}) "
        "robustness={robustness}"
    )


class HardnessReport(Report):
    """Consistency/robustness of every PM auction plus the Pareto frontier."""

    fields_accepted = {
        "n",
        "alpha",
        "bound",
        "best_robustness",
        "rows",
        "frontier",
        "violations",
        "scenario_flags",
        "holds",
    }
    fields_rational = {"alpha", "bound", "best_robustness"}
    _default_format = "n={n} alpha={alpha} bound={bound} holds={holds}"
