"""Calendar-month helpers.

Months are represented as "YYYY-MM" strings throughout the package: they are
JSON-native, zero-padded, and sort chronologically as plain strings.
"""

from __future__ import annotations

import re
from datetime import date

from .errors import InputError

_MONTH_RE = re.compile(r"^\d{4}-(0[1-9]|1[0-2])$")


def validate_month(month: str) -> str:
    if not _MONTH_RE.match(month):
        raise InputError(f"not a YYYY-MM month: {month!r}")
    return month


def month_of_date(date_str: str) -> str:
    """Truncate a YYYY-MM-DD date string to its calendar month."""
    try:
        parsed = date.fromisoformat(date_str)
    except ValueError as exc:
        raise InputError(f"not a YYYY-MM-DD date: {date_str!r}") from exc
    return f"{parsed.year:04d}-{parsed.month:02d}"


def next_month(month: str) -> str:
    validate_month(month)
    year, mon = int(month[:4]), int(month[5:7])
    if mon == 12:
        year, mon = year + 1, 1
    else:
        mon += 1
    return f"{year:04d}-{mon:02d}"
