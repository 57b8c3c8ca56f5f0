# coding=utf-8

"""Provides a high-level interface for online auction mechanisms."""

from abc import ABC, abstractmethod
from copy import copy

from auctionlab import log
from auctionlab.core import AuctionParams, as_prediction
from auctionlab.engine import (
    alloc,
    alloc_literal,
    outcome_of,
    payment,
    reported_instance,
    settle,
)
from auctionlab.exceptions import AuctionLabException, AuctionLabInputException
from auctionlab.utils import format_rational

__all__ = [
    "MECHANISMS",
    "ErrorTolerant",
    "Mechanism",
    "NoRerunThreePhase",
    "NoTieBreakThreePhase",
    "ThreePhase",
    "ThreePhaseLiteral",
    "has_mechanism",
    "mechanism_factory",
]


class Mechanism(ABC):
    """ABC for Mechanisms, allocation plus payment rules run on an Instance.

    Options are `params` (an AuctionParams) or `alpha`, `gamma` and `n`, plus
    `record` to keep event traces and `rerun_rescale` to rerun the payment
    simulation with the milestone counts of n - 1 bidders.
    """

    name = None

    def __init__(self, **options):
        params = options.get("params")
        if params is None:
            if options.get("alpha") is None:
                raise AuctionLabInputException("%s requires alpha" % self.name)
            params = AuctionParams(
                options["alpha"],
                options.get("gamma", 1),
                options.get("n"),
                options.get("strict_wn", False),
            )
        self._params = params
        self._record = options.get("record", False)
        self._rerun_rescale = options.get("rerun_rescale", False)

    def __repr__(self):
        return "<%s: alpha=%s gamma=%s>" % (
            self.__class__.__name__,
            self.alpha,
            self.gamma,
        )

    @abstractmethod
    def alloc(self, instance, prediction):
        pass

    def payment(self, instance, prediction, result):
        return payment(
            instance,
            self._params,
            prediction,
            result,
            rerun_rescale=self._rerun_rescale,
        )

    def run(self, instance, prediction):
        prediction = as_prediction(prediction)
        result = self.alloc(instance, prediction)
        price = 0
        if result.winner is not None:
            price = self.payment(instance, prediction, result)
        return outcome_of(instance, result, price)

    def run_with_reports(self, instance, reports, prediction):
        reported = reported_instance(instance, reports)
        return settle(instance, self.run(reported, prediction))

    def traced(self):
        """Returns a copy of the mechanism that records event traces."""
        clone = copy(self)
        clone._record = True
        return clone

    @property
    def params(self):
        return self._params

    @property
    def alpha(self):
        return self._params.alpha

    @property
    def gamma(self):
        return self._params.gamma

    @property
    def record(self):
        return self._record

    @property
    def options(self):
        """Identifying options, used as part of evaluation cache keys."""
        return {
            "mechanism": self.name,
            "alpha": format_rational(self.alpha),
            "gamma": format_rational(self.gamma),
            "n": self._params.n,
            "rerun_rescale": self._rerun_rescale,
        }


class ThreePhase(Mechanism):
    """Observe, then post max(v_max, prediction), then post v_max."""

    name = "three-phase"

    def __init__(self, **options):
        super(ThreePhase, self).__init__(**options)
        if self.gamma != 1:
            log.warning("%s ignores gamma=%s", self.name, self.gamma)
            self._params = self._params.replace(gamma=1)

    def alloc(self, instance, prediction):
        return alloc(instance, self._params, prediction, record=self._record)


class ErrorTolerant(Mechanism):
    """Three-Phase with the second-phase price scaled down to gamma * prediction.
    """

    name = "error-tolerant"

    def alloc(self, instance, prediction):
        return alloc(instance, self._params, prediction, record=self._record)


class ThreePhaseLiteral(ThreePhase):
    """Three-Phase allocating with two one-shot threshold updates."""

    name = "three-phase-literal"

    def alloc(self, instance, prediction):
        return alloc_literal(
            instance, self._params, prediction, record=self._record
        )


class NoRerunThreePhase(ThreePhase):
    """Broken variant that always charges the clinch threshold."""

    name = "no-rerun"

    def payment(self, instance, prediction, result):
        return payment(instance, self._params, prediction, result, rerun=False)


class NoTieBreakThreePhase(ThreePhase):
    """Broken variant that applies the rerun price whatever the rerun winner."""

    name = "no-tie-break"

    def payment(self, instance, prediction, result):
        return payment(
            instance,
            self._params,
            prediction,
            result,
            tie_break_rule=False,
            rerun_rescale=self._rerun_rescale,
        )


MECHANISMS = {
    m.name: m
    for m in (
        ThreePhase,
        ErrorTolerant,
        ThreePhaseLiteral,
        NoRerunThreePhase,
        NoTieBreakThreePhase,
    )
}


def has_mechanism(name):
    """Verifies that a mechanism is registered under `name`."""
    return str(name).lower() in MECHANISMS


def mechanism_factory(name, **options):
    """Factory function for Mechanism concrete classes."""
    try:
        cls = MECHANISMS[str(name).lower()]
    except KeyError:
        msg = "Attempted to initialize non-existing mechanism %r" % name
        log.error(msg)
        raise AuctionLabException(msg)
    return cls(**options)
