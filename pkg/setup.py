#!/usr/bin/env python
# coding=utf-8

from setuptools import find_packages, setup

from auctionlab.__version__ import VERSION

with open("readme.md", "r") as fp:
    LONG_DESCRIPTION = fp.read()

with open("requirements.txt", "r") as fp:
    REQUIREMENTS = fp.read().splitlines()

setup(
    description=(
        "Python library and command-line tool for learning-augmented online "
        "auctions, providing exact and Monte Carlo revenue evaluation, "
        "truthfulness audits, LP certificates and impossibility scans"
    ),
    entry_points={"console_scripts": ["auctionlab=auctionlab.cli:main"]},
    include_package_data=True,
    install_requires=REQUIREMENTS,
    license="MIT",
    long_description=LONG_DESCRIPTION,
    long_description_content_type="text/markdown",
    name="auctionlab",
    packages=find_packages(exclude=("tests", "tests.*")),
    python_requires=">=3.7",
    version=VERSION,
)
