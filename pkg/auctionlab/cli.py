# coding=utf-8

"""Command-line interface for auctionlab.

Exit codes: 0 on success, 1 when a checked property is violated or a
certificate is infeasible, 2 on input errors.
"""

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from auctionlab import log
from auctionlab.__version__ import VERSION
from auctionlab.audit import audit_instance
from auctionlab.core import (
    AuctionParams,
    canonical_consistency_instance,
    canonical_robustness_instance,
    disjoint_intervals,
    load_instance,
    random_overlapping_instance,
)
from auctionlab.evaluation import (
    DEFAULT_ALPHA_GRID,
    benchmarks,
    default_scenarios,
    exact_expected_revenue,
    mc_expected_revenue,
    robustness_floor,
    tradeoff_sweep,
)
from auctionlab.exceptions import (
    AuctionLabCertificateException,
    AuctionLabException,
    AuctionLabInputException,
)
from auctionlab.family import (
    hardness_scan,
    optimal_thresholds,
    verify_interchange,
    verify_pa_dominance,
)
from auctionlab.lpbound import explicit_dual, scan_certificates, solve_primal
from auctionlab.mechanisms import MECHANISMS, mechanism_factory
from auctionlab.utils import (
    clean_dict,
    format_decimal,
    format_rational,
    rational_list,
    to_rational,
)

__all__ = ["EXIT_INPUT", "EXIT_OK", "EXIT_VIOLATION", "RunConfig", "main"]

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2


@dataclass(frozen=True)
class RunConfig:
    """Validated command-line configuration shared by every subcommand."""

    subcommand: str
    instance: str = None
    alpha: Fraction = None
    gamma: Fraction = Fraction(1)
    predictions: tuple = ()
    mode: str = "exact"
    trials: int = 10000
    seed: int = 0
    output_format: str = "json"
    output: str = None
    cap: int = None
    workers: int = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ("exact", "mc"):
            raise AuctionLabInputException("mode must be exact or mc")
        if self.mode == "mc" and self.trials < 1:
            raise AuctionLabInputException("mc mode requires trials >= 1")
        if self.output_format not in ("json", "csv"):
            raise AuctionLabInputException("format must be json or csv")

    @classmethod
    def from_namespace(cls, namespace):
        options = vars(namespace).copy()
        predictions = options.pop("prediction", None)
        if predictions is None:
            predictions = ()
        elif not isinstance(predictions, (list, tuple)):
            predictions = (predictions,)
        gamma = options.pop("gamma", None)
        config = cls(
            subcommand=options.pop("subcommand"),
            instance=options.pop("instance", None),
            alpha=options.pop("alpha", None),
            gamma=Fraction(1) if gamma is None else gamma,
            predictions=tuple(predictions),
            mode="mc" if options.pop("mc", False) else "exact",
            trials=options.pop("trials", 10000),
            seed=options.pop("seed", 0),
            output_format=options.pop("format"),
            output=options.pop("output"),
            cap=options.pop("cap"),
            workers=options.pop("workers"),
            extra={k: v for k, v in options.items() if k not in ("verbose", "exact")},
        )
        return config

    @property
    def params(self):
        if self.alpha is None:
            raise AuctionLabInputException("--alpha is required")
        return AuctionParams(self.alpha, self.gamma)

    @property
    def prediction(self):
        if not self.predictions:
            raise AuctionLabInputException("--prediction is required")
        return self.predictions[0]


def _rational(s):
    try:
        return to_rational(s)
    except AuctionLabInputException as e:
        raise argparse.ArgumentTypeError(str(e))


def _rationals(s):
    try:
        return rational_list(s)
    except AuctionLabInputException as e:
        raise argparse.ArgumentTypeError(str(e))


def _parser():
    parser = argparse.ArgumentParser(
        prog="auctionlab",
        description="learning-augmented online auctions and their guarantees",
    )
    parser.add_argument("--version", action="version", version=VERSION)
    parser.add_argument("--cap", type=int, help="enumeration cap (default 10)")
    parser.add_argument("--workers", type=int, help="worker processes")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--output", help="write output to a file")
    subparsers = parser.add_subparsers(dest="subcommand")
    subparsers.required = True

    run = subparsers.add_parser("run", help="run one auction on an instance")
    run.add_argument("--instance", required=True)
    run.add_argument("--alpha", type=_rational, required=True)
    run.add_argument("--gamma", type=_rational)
    run.add_argument("--prediction", type=_rational, required=True)
    run.add_argument("--mechanism", choices=sorted(MECHANISMS))
    run.add_argument("--trace", action="store_true")

    evaluate = subparsers.add_parser("eval", help="expected revenue")
    mode = evaluate.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", default=True)
    mode.add_argument("--mc", action="store_true")
    evaluate.add_argument("--alpha", type=_rational, required=True)
    evaluate.add_argument("--gamma", type=_rational)
    evaluate.add_argument("--n", type=int, default=10)
    evaluate.add_argument(
        "--family",
        choices=("disjoint-canonical", "instance"),
        default="disjoint-canonical",
    )
    evaluate.add_argument("--instance")
    evaluate.add_argument("--prediction", type=_rational)
    evaluate.add_argument("--eps", type=_rational, default=Fraction(1, 2))
    evaluate.add_argument("--trials", type=int, default=10000)
    evaluate.add_argument("--seed", type=int, default=0)

    sweep = subparsers.add_parser("sweep", help="consistency/robustness curve")
    sweep.add_argument("--n", type=int, default=10)
    sweep.add_argument("--alphas", type=_rationals, default=list(DEFAULT_ALPHA_GRID))
    sweep.add_argument("--eps", type=_rational, default=Fraction(1, 2))

    audit = subparsers.add_parser("audit", help="search profitable misreports")
    audit.add_argument("--instance")
    audit.add_argument("--seeds", type=int, default=200)
    audit.add_argument("--n", type=int, default=5)
    audit.add_argument("--alpha", type=_rational, default=Fraction(1, 2))
    audit.add_argument("--gamma", type=_rational)
    audit.add_argument("--prediction", type=_rational)
    audit.add_argument("--mechanism", choices=sorted(MECHANISMS))
    audit.add_argument("--adversarial", action="store_true")
    audit.add_argument("--samples", type=int, default=4)
    audit.add_argument("--seed", type=int, default=0)

    lp = subparsers.add_parser("lp", help="LP dual certificate")
    lp.add_argument("--n", type=int)
    lp.add_argument("--literal", action="store_true")
    lp.add_argument("--primal", action="store_true")
    lp.add_argument("--scan", type=int, metavar="N_MAX")

    family = subparsers.add_parser("family", help="PA/PM auction families")
    checks = family.add_mutually_exclusive_group(required=True)
    checks.add_argument("--hardness", action="store_true")
    checks.add_argument("--interchange", action="store_true")
    checks.add_argument("--thresholds", action="store_true")
    checks.add_argument("--dominance", action="store_true")
    family.add_argument("--n", type=int, required=True)
    family.add_argument("--alpha", type=_rational, default=Fraction(0))
    family.add_argument("--eps", type=_rational, default=Fraction(1, 2))
    return parser


def _emit(config, text):
    if config.output:
        with open(config.output, "w") as fp:
            fp.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _dumps(content):
    return json.dumps(content, sort_keys=True)


def _csv(header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue().rstrip("\n")


def _outcome_dict(outcome):
    content = {
        "winner": outcome.winner,
        "allocation_time": outcome.allocation_time,
        "price": outcome.price if outcome.sold else None,
        "revenue": to_rational(outcome.revenue),
        "welfare": to_rational(outcome.welfare),
        "threshold": outcome.threshold,
    }
    return clean_dict(content)


def _mechanism_for(config, **kwargs):
    """Picks error-tolerant when gamma is below 1 and no mechanism was named.

    Only error-tolerant honours gamma, so naming any other mechanism together
    with gamma != 1 is rejected.
    """
    params = config.params
    name = config.extra.get("mechanism")
    if name is None:
        name = "three-phase" if params.gamma == 1 else "error-tolerant"
    elif name != "error-tolerant" and params.gamma != 1:
        msg = "--gamma %s requires --mechanism error-tolerant, got %s" % (
            params.gamma,
            name,
        )
        log.error(msg)
        raise AuctionLabInputException(msg)
    return mechanism_factory(name, params=params, **kwargs)


def cmd_run(config):
    instance = load_instance(config.instance)
    mechanism = _mechanism_for(config, record=config.extra.get("trace", False))
    outcome = mechanism.run(instance, config.prediction)
    text = _dumps(_outcome_dict(outcome))
    if config.extra.get("trace") and outcome.trace is not None:
        text += "\n" + outcome.trace.to_json_lines()
    _emit(config, text)
    return EXIT_OK


def _canonical_eval(config):
    n = config.extra["n"]
    params = config.params
    intervals = disjoint_intervals(n)
    consistency_values, truth = canonical_consistency_instance(n)
    robustness_values, _ = canonical_robustness_instance(n, config.extra["eps"])
    options = {"cap": config.cap, "workers": config.workers}

    if config.mode == "exact":
        evaluate = lambda values, prediction: exact_expected_revenue(
            values, intervals, params, prediction, **options
        )
    else:
        evaluate = lambda values, prediction: mc_expected_revenue(
            values,
            intervals,
            params,
            prediction,
            config.trials,
            config.seed,
            workers=config.workers,
        )
    consistency = evaluate(consistency_values, truth)
    profile = {}
    for scenario in default_scenarios(robustness_values):
        report = evaluate(robustness_values, scenario)
        profile[format_rational(scenario.value)] = report["ratio_v2"]
    content = {
        "n": n,
        "mode": config.mode,
        "alpha": params.alpha,
        "gamma": params.gamma,
        "consistency": consistency["ratio_v1"],
        "consistency_report": consistency.to_dict(),
        "robustness": min(profile.values()),
        "profile": clean_dict(profile),
        "floor": robustness_floor(n, params.alpha, "asymptotic"),
        "exact_floor": robustness_floor(n, params.alpha, "exact"),
    }
    return clean_dict(content)


def cmd_eval(config):
    if config.extra["family"] == "disjoint-canonical":
        content = _canonical_eval(config)
    else:
        if not config.instance:
            raise AuctionLabInputException("--instance is required")
        instance = load_instance(config.instance)
        prediction = (
            config.predictions[0]
            if config.predictions
            else benchmarks(instance.values)[0]
        )
        if config.mode == "exact":
            report = exact_expected_revenue(
                instance.values,
                instance.intervals,
                config.params,
                prediction,
                tie_break=instance.tie_break,
                cap=config.cap,
                workers=config.workers,
            )
        else:
            report = mc_expected_revenue(
                instance.values,
                instance.intervals,
                config.params,
                prediction,
                config.trials,
                config.seed,
                tie_break=instance.tie_break,
                workers=config.workers,
            )
        content = report.to_dict()
    _emit(config, _dumps(content))
    return EXIT_OK


def cmd_sweep(config):
    n = config.extra["n"]
    rows = tradeoff_sweep(
        n,
        config.extra["alphas"],
        eps=config.extra["eps"],
        cap=config.cap,
        workers=config.workers,
    )
    if not rows:
        msg = "no alpha in the grid belongs to W_%d" % n
        log.error(msg)
        raise AuctionLabInputException(msg)
    if config.output_format == "csv":
        fields = ("alpha", "consistency", "robustness", "floor")
        text = _csv(
            list(fields) + ["n"] + ["%s_decimal" % f for f in fields],
            [
                [format_rational(row[f]) for f in fields]
                + [row["n"]]
                + [format_decimal(row[f]) for f in fields]
                for row in rows
            ],
        )
    else:
        text = _dumps([row.to_dict() for row in rows])
    _emit(config, text)
    return EXIT_VIOLATION if any(row.violated for row in rows) else EXIT_OK


def _audit_targets(config):
    if config.instance:
        return [load_instance(config.instance)]
    n_max = config.extra["n"]
    if n_max < 2:
        raise AuctionLabInputException("--n must be at least 2")
    return [
        random_overlapping_instance(2 + seed % (n_max - 1), seed)
        for seed in range(config.extra["seeds"])
    ]


def cmd_audit(config):
    mechanism = _mechanism_for(config)
    witnesses = []
    audited = 0
    max_gain = None
    for index, instance in enumerate(_audit_targets(config)):
        prediction = (
            config.predictions[0]
            if config.predictions
            else benchmarks(instance.values)[0]
        )
        reports = audit_instance(
            instance,
            config.params,
            prediction,
            adversarial_others=config.extra["adversarial"],
            samples=config.extra["samples"],
            seed=config.seed,
            mechanism=mechanism,
            workers=config.workers,
        )
        audited += 1
        for report in reports:
            if max_gain is None or report["gain"] > max_gain:
                max_gain = report["gain"]
            if report.violated:
                witness = report.to_dict()
                witness["instance"] = index
                witnesses.append(witness)
        log.info("audited instance %d", index)
    content = {
        "mechanism": mechanism.name,
        "instances": audited,
        "max_gain": format_rational(max_gain) if max_gain is not None else None,
        "positive_gains": witnesses,
    }
    _emit(config, _dumps(clean_dict(content)))
    return EXIT_VIOLATION if witnesses else EXIT_OK


def cmd_lp(config):
    if config.extra.get("scan"):
        failures = scan_certificates(config.extra["scan"])
        content = {
            "n_max": config.extra["scan"],
            "failures": [{"n": n, "reason": reason} for n, reason in failures],
        }
        _emit(config, _dumps(content))
        return EXIT_VIOLATION if failures else EXIT_OK
    n = config.extra.get("n")
    if n is None:
        raise AuctionLabInputException("--n or --scan is required")
    certificate = explicit_dual(n, clamp=not config.extra["literal"])
    content = certificate.to_dict()
    if config.extra["primal"]:
        content["primal"] = solve_primal(n).to_dict()
    _emit(config, _dumps(content))
    return EXIT_OK if content["feasible"] else EXIT_VIOLATION


def cmd_family(config):
    n = config.extra["n"]
    alpha = config.alpha if config.alpha is not None else Fraction(0)
    eps = config.extra["eps"]
    if config.extra["hardness"]:
        report = hardness_scan(n, alpha, eps, cap=config.cap)
        if config.output_format == "csv":
            text = _csv(
                ["consistency", "max_robustness"],
                [[p["consistency"], p["max_robustness"]] for p in report["frontier"]],
            )
        else:
            text = _dumps(report.to_dict())
        _emit(config, text)
        return EXIT_VIOLATION if report.violated else EXIT_OK
    if config.extra["interchange"]:
        report = verify_interchange(n, eps, cap=config.cap)
    elif config.extra["thresholds"]:
        report = optimal_thresholds(n, alpha, eps, cap=config.cap)
    else:
        violations, regressions = verify_pa_dominance(n, eps, cap=config.cap)
        content = {
            "n": n,
            "violations": violations,
            "scenario_regressions": regressions,
            "holds": not violations,
        }
        _emit(config, _dumps(content))
        return EXIT_VIOLATION if violations else EXIT_OK
    _emit(config, _dumps(report.to_dict()))
    return EXIT_VIOLATION if report.violated else EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "audit": cmd_audit,
    "lp": cmd_lp,
    "family": cmd_family,
}


def main(argv=None):
    """Entry point; returns the process exit code."""
    try:
        namespace = _parser().parse_args(argv)
    except SystemExit as e:
        return e.code
    if namespace.verbose:
        log.setLevel(logging.DEBUG if namespace.verbose > 1 else logging.INFO)
    try:
        config = RunConfig.from_namespace(namespace)
        return COMMANDS[config.subcommand](config)
    except AuctionLabInputException as e:
        sys.stderr.write("error: %s\n" % e)
        return EXIT_INPUT
    except AuctionLabCertificateException as e:
        sys.stderr.write("certificate: %s\n" % e)
        return EXIT_VIOLATION
    except AuctionLabException as e:
        sys.stderr.write("error: %s\n" % e)
        return EXIT_VIOLATION
