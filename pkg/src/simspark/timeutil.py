"""Canonical simulation time handling.

All simulation timestamps live in the "Anywhere on Earth" zone (UTC-12).
Timestamps are stored tz-aware in AoE and serialized as ISO-8601 with an
explicit -12:00 offset; any display conversion is a client concern.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

AOE = timezone(timedelta(hours=-12), name="AoE")


def to_aoe(dt: datetime) -> datetime:
    """Convert a tz-aware datetime to AoE. Naive datetimes are rejected."""
    if dt.tzinfo is None:
        raise ValueError("naive datetime; timestamps must carry an offset")
    return dt.astimezone(AOE)


def parse_aoe(text: str) -> datetime:
    """Parse an ISO-8601 timestamp with explicit offset into AoE."""
    dt = datetime.fromisoformat(text)
    return to_aoe(dt)


def format_aoe(dt: datetime) -> str:
    return to_aoe(dt).isoformat()


# fixed English names: prompt rendering must not change with the host
# locale, or recorded transcripts stop replaying across machines
_DAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")
_MONTHS = (
    "January", "February", "March", "April", "May", "June",
    "July", "August", "September", "October", "November", "December",
)


def human_date(dt: datetime) -> str:
    dt = to_aoe(dt)
    return f"{_DAYS[dt.weekday()]}, {_MONTHS[dt.month - 1]} {dt.day:02d}, {dt.year}"


def human_time(dt: datetime) -> str:
    """Readable form used inside prompts, e.g. '14:00 on Monday, July 01, 2024'."""
    dt = to_aoe(dt)
    return f"{dt.hour:02d}:{dt.minute:02d} on {human_date(dt)}"
