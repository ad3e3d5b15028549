"""Parsing of human-friendly quantities ("5 GB/s", "100 ns", "256 MiB")."""

import re

from .errors import UnitError

_BYTES = {
    "": 1, "b": 1,
    "kb": 10**3, "mb": 10**6, "gb": 10**9, "tb": 10**12,
    "kib": 2**10, "mib": 2**20, "gib": 2**30, "tib": 2**40,
}
# Divisors rather than multipliers: 100 / 1e9 rounds to 1e-7, 100 * 1e-9 does not.
_PER_SECOND = {
    "s": 1.0, "ms": 1e3, "us": 1e6, "µs": 1e6, "ns": 1e9, "ps": 1e12,
}

_QTY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-zµ/]*)\s*$")


def _split(value):
    m = _QTY.match(value)
    if not m:
        raise UnitError(f"cannot parse quantity {value!r}")
    return float(m.group(1)), m.group(2).lower()


def parse_bytes(value):
    """Byte count from a number or a string with a decimal/binary suffix."""
    if isinstance(value, bool):
        raise UnitError(f"expected a byte quantity, got {value!r}")
    if isinstance(value, (int, float)):
        return value
    num, unit = _split(value)
    if unit not in _BYTES:
        raise UnitError(f"unknown size unit {unit!r} in {value!r}")
    out = num * _BYTES[unit]
    return int(out) if float(out).is_integer() else out


def parse_bandwidth(value):
    """Bytes per second; accepts e.g. ``"5 GB/s"`` or ``"4 GiB/s"``."""
    if isinstance(value, bool):
        raise UnitError(f"expected a bandwidth, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    num, unit = _split(value)
    if not unit.endswith("/s"):
        if unit == "":
            return num
        raise UnitError(f"bandwidth {value!r} must be per second")
    base = unit[:-2]
    if base not in _BYTES:
        raise UnitError(f"unknown bandwidth unit {unit!r} in {value!r}")
    return num * _BYTES[base]


def parse_seconds(value):
    if isinstance(value, bool):
        raise UnitError(f"expected a duration, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    num, unit = _split(value)
    if unit == "":
        return num
    if unit not in _PER_SECOND:
        raise UnitError(f"unknown time unit {unit!r} in {value!r}")
    return num / _PER_SECOND[unit]
