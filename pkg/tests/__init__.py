# coding=utf-8

from fractions import Fraction
from logging import getLogger
from os import environ

getLogger("auctionlab").disabled = True
environ["AUCTIONLAB_CACHE"] = "0"

# (arrival, departure, value); with alpha=1/2 and prediction 8 bidder 0
# clinches at 8 and pays 5 after the rerun.
PAYMENT_BIDDERS = ((0, 10, 9), (1, 2, 3), (3, 4, 5), (5, 6, 2))
PAYMENT_ALPHA = Fraction(1, 2)
PAYMENT_PREDICTION = 8

# alpha=1/3; bidder 4 reporting value 8 wins in the second phase.
TIE_BREAK_BIDDERS = (
    (1, 2, 3),
    (3, 4, 5),
    (5, 6, 1),
    (7, 8, 2),
    (0, 20, 6),
    (0, 20, 7),
)
TIE_BREAK_ORDER = (5, 4, 0, 1, 2, 3)
TIE_BREAK_ALPHA = Fraction(1, 3)
TIE_BREAK_PREDICTION = 8

SEQUENTIAL_VALUES = (3, 7, 5, 2)

# (n, alpha, i1_count, i2_count)
MILESTONES = [
    (10, Fraction(3, 5), 2, 8),
    (4, Fraction(1), 0, 4),
    (7, Fraction(5, 7), 1, 6),
    (4, Fraction(1, 2), 1, 3),
    (10, Fraction(0), 5, 5),
]

JUNK_TEXT = "asdf#$@#g9765sdfg54hggaw"
