# coding=utf-8

r"""
                    _   _             _       _
   __ _ _   _  ___| |_(_) ___  _ __ | | __ _| |__
  / _` | | | |/ __| __| |/ _ \| '_ \| |/ _` | '_ \
 | (_| | |_| | (__| |_| | (_) | | | | | (_| | |_) |
  \__,_|\__,_|\___|\__|_|\___/|_| |_|_|\__,_|_.__/

auctionlab runs learning-augmented online single-item auctions and checks
their revenue guarantees, incentive properties and impossibility bounds by
exact enumeration, Monte Carlo simulation and LP duality.

"""

import logging

__all__ = ["log"]

log = logging.getLogger(__name__)
log.addHandler((logging.StreamHandler()))
log.setLevel(logging.FATAL)
