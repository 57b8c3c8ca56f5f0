# coding=utf-8

"""Shared fixtures automatically imported by PyTest."""

import pytest

from tests import (
    PAYMENT_ALPHA,
    PAYMENT_BIDDERS,
    SEQUENTIAL_VALUES,
    TIE_BREAK_BIDDERS,
    TIE_BREAK_ORDER,
)


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run slow tests"
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-scale enumerations")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def payment_instance():
    """Four bidders; the long-lived one wins and is repriced by the rerun."""
    from auctionlab.core import Instance

    return Instance(PAYMENT_BIDDERS)


@pytest.fixture
def payment_params():
    from auctionlab.core import AuctionParams

    return AuctionParams(PAYMENT_ALPHA)


@pytest.fixture
def tie_break_instance():
    """Six bidders where the rerun winner outranks a deviating bidder."""
    from auctionlab.core import Instance

    return Instance(TIE_BREAK_BIDDERS, TIE_BREAK_ORDER)


@pytest.fixture
def sequential():
    """Unit-time bidders with values (3, 7, 5, 2)."""
    from auctionlab.core import sequential_instance

    return sequential_instance(SEQUENTIAL_VALUES)


@pytest.fixture
def three_phase():
    """Returns a ThreePhase mechanism with alpha=1/2."""
    from auctionlab.mechanisms import ThreePhase

    return ThreePhase(alpha=PAYMENT_ALPHA)


@pytest.fixture
def instance_file(tmp_path, payment_instance):
    """Writes the payment instance to a JSON file and returns its path."""
    from auctionlab.core import dump_instance

    target = tmp_path / "instance.json"
    dump_instance(payment_instance, str(target))
    return str(target)
