# coding=utf-8

"""A collection of utility functions non-specific to auctionlab's domain logic."""

import hashlib
import json
import math
from fractions import Fraction
from os import environ, listdir, makedirs, path, remove

from appdirs import user_cache_dir

from auctionlab import log
from auctionlab.__version__ import VERSION
from auctionlab.exceptions import (
    AuctionLabEnumerationException,
    AuctionLabInputException,
)

__all__ = [
    "CACHE_PATH",
    "DEFAULT_CAP",
    "INFINITY",
    "cache_enabled",
    "cache_get",
    "cache_key",
    "cache_put",
    "clean_dict",
    "clear_cache",
    "d2l",
    "enumeration_cap",
    "ensure_enumerable",
    "format_decimal",
    "format_rational",
    "rational_list",
    "to_rational",
    "worker_count",
]

DEFAULT_CAP = 10
INFINITY = math.inf
CACHE_PATH = path.join(user_cache_dir("auctionlab"), "exact")


def to_rational(value):
    """Converts ints, Fractions and "p/q" or decimal strings into a Fraction.

    Decimal strings are converted exactly, so "0.6" becomes 3/5.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise AuctionLabInputException("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise AuctionLabInputException("%r is not a finite rational" % value)
        return Fraction(repr(value))
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise AuctionLabInputException(
            "cannot parse %r as a rational: %s" % (value, e)
        )


def format_rational(value):
    """Formats a rational as an exact "numerator/denominator" string."""
    if isinstance(value, float) and math.isinf(value):
        raise AuctionLabInputException("infinity cannot be serialized as a price")
    value = to_rational(value)
    return "%d/%d" % (value.numerator, value.denominator)


def format_decimal(value, places=6):
    """Formats a rational (or the infinity sentinel) as a rounded decimal."""
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return "%.*f" % (places, float(value))


def rational_list(s):
    """Parses a comma delimited list of rationals, i.e. "0,1/5,0.4"."""
    if isinstance(s, (list, tuple)):
        return [to_rational(v) for v in s]
    return [to_rational(v) for v in str(s).split(",") if v.strip()]


def clean_dict(target_dict, whitelist=None):
    """Convenience function that drops unset keys and stringifies rationals."""
    assert isinstance(target_dict, dict)
    cleaned = {}
    for k, v in target_dict.items():
        if v is None or (whitelist and k not in whitelist):
            continue
        if isinstance(v, Fraction):
            v = format_rational(v)
        elif isinstance(v, float) and math.isinf(v):
            v = "inf"
        elif isinstance(v, dict):
            v = clean_dict(v)
        elif isinstance(v, (list, tuple)):
            v = [
                format_rational(x) if isinstance(x, Fraction) else x
                for x in v
            ]
        cleaned[str(k).strip()] = v
    return cleaned


def d2l(d):
    """Convenience function that converts a dict into a sorted tuples list."""
    return sorted([(k, v) for k, v in d.items()])


def enumeration_cap(cap=None):
    """Resolves the enumeration cap: explicit value, environment, default."""
    if cap is None:
        cap = environ.get("AUCTIONLAB_CAP", DEFAULT_CAP)
    try:
        cap = int(cap)
    except ValueError:
        raise AuctionLabInputException("AUCTIONLAB_CAP must be an integer")
    if cap < 1:
        raise AuctionLabInputException("enumeration cap must be positive")
    return cap


def ensure_enumerable(n, cap=None, what="exact enumeration"):
    """Refuses factorial enumerations over more than `cap` bidders."""
    cap = enumeration_cap(cap)
    if n > cap:
        msg = (
            "%s over n=%d exceeds the enumeration cap of %d; use Monte Carlo "
            "mode (--mc) or raise --cap / AUCTIONLAB_CAP" % (what, n, cap)
        )
        log.error(msg)
        raise AuctionLabEnumerationException(msg)
    return cap


def worker_count(workers=None):
    """Resolves the worker count: explicit value, environment, then 1."""
    if workers is None:
        workers = environ.get("AUCTIONLAB_WORKERS", 1)
    try:
        workers = int(workers)
    except ValueError:
        raise AuctionLabInputException("AUCTIONLAB_WORKERS must be an integer")
    return max(1, workers)


def cache_enabled(cache=None):
    """Resolves whether exact results may be memoized on disk."""
    if cache is None:
        return environ.get("AUCTIONLAB_CACHE", "1") != "0"
    return bool(cache)


def cache_key(**parts):
    """Hashes keyword parts and the package version into a stable cache key."""
    parts = dict(parts, version=VERSION)
    payload = json.dumps(d2l(clean_dict(parts)), sort_keys=True)
    return hashlib.sha1(payload.encode("utf-8")).hexdigest()


def cache_get(key):
    """Returns a memoized JSON payload, or None when absent or unreadable."""
    target = path.join(CACHE_PATH, key + ".json")
    try:
        with open(target, "r") as fp:
            content = json.load(fp)
    except (IOError, OSError, ValueError):
        return None
    log.debug("cache hit: %s", key)
    return content


def cache_put(key, payload):
    """Memoizes a JSON payload; failures to write are logged, not raised."""
    target = path.join(CACHE_PATH, key + ".json")
    try:
        makedirs(CACHE_PATH, exist_ok=True)
        with open(target, "w") as fp:
            json.dump(payload, fp, sort_keys=True)
    except (IOError, OSError) as e:
        log.debug(e, exc_info=True)


def clear_cache():
    """Removes every memoized exact evaluation."""
    if not path.isdir(CACHE_PATH):
        return
    for name in listdir(CACHE_PATH):
        if name.endswith(".json"):
            remove(path.join(CACHE_PATH, name))
