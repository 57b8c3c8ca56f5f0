# coding=utf-8

"""Exceptions used by auctionlab."""


class AuctionLabException(Exception):
    """Base exception for the auctionlab package.
    """


class AuctionLabInputException(AuctionLabException):
    """Raised when an input is malformed; ie. an unparseable rational, an
    instance file with missing fields or parameters outside their range.
    """


class AuctionLabEnumerationException(AuctionLabInputException):
    """Raised when an exact enumeration would exceed the configured cap.
    """


class AuctionLabCertificateException(AuctionLabException):
    """Raised when an LP certificate or primal solution fails its exact
    feasibility check.
    """
