"""Calendar-free date arithmetic and payment schedules.

Dates are integer day serials counted from the valuation (spot) date, which is
day 0. The calendar is simplified: every month has 30 days and every year 360,
there are no holidays and no business-day rolls. Curve time is therefore
``serial / 360`` and a 6m period is exactly 0.5 years.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import InputError

DAYS_PER_MONTH = 30
DAYS_PER_YEAR = 360

DatePoint = int


class DayCount(str, enum.Enum):
    ACT360 = "ACT360"
    THIRTY360 = "THIRTY360"
    ACTACT = "ACTACT"


class Tenor(str, enum.Enum):
    """Floating-rate index tenors; ``1d`` labels the overnight/discounting curve."""

    D1 = "1d"
    M1 = "1m"
    M3 = "3m"
    M6 = "6m"
    M12 = "12m"

    @property
    def months(self) -> int:
        return _TENOR_MONTHS[self]

    @property
    def days(self) -> int:
        return 1 if self is Tenor.D1 else DAYS_PER_MONTH * self.months

    @property
    def year_fraction(self) -> float:
        return self.days / DAYS_PER_YEAR

    @classmethod
    def parse(cls, label: str) -> "Tenor":
        try:
            return cls(label.strip().lower())
        except ValueError:
            raise InputError(f"unknown tenor label {label!r}") from None


_TENOR_MONTHS = {Tenor.D1: 0, Tenor.M1: 1, Tenor.M3: 3, Tenor.M6: 6, Tenor.M12: 12}

FORWARDING_TENORS = (Tenor.M1, Tenor.M3, Tenor.M6, Tenor.M12)


def to_time(serial: DatePoint) -> float:
    """Curve time (year fraction from the snapshot) of a day serial."""
    return serial / DAYS_PER_YEAR


def _ymd(serial: int) -> tuple[int, int, int]:
    y, rem = divmod(serial, DAYS_PER_YEAR)
    m, d = divmod(rem, DAYS_PER_MONTH)
    return y, m + 1, d + 1


def year_fraction(start: DatePoint, end: DatePoint, convention: DayCount | str = DayCount.ACT360) -> float:
    if end < start:
        raise InputError(f"year_fraction: end {end} precedes start {start}")
    convention = DayCount(convention)
    if convention is DayCount.THIRTY360:
        y1, m1, d1 = _ymd(start)
        y2, m2, d2 = _ymd(end)
        d1 = min(d1, 30)
        if d1 == 30:
            d2 = min(d2, 30)
        return (360 * (y2 - y1) + 30 * (m2 - m1) + (d2 - d1)) / 360.0
    # ACT/ACT over a calendar whose years all have 360 days.
    return (end - start) / DAYS_PER_YEAR


def parse_period(text: str | int) -> int:
    """Convert ``'18m'``, ``'5y'``, ``'2w'``, ``'1d'`` or a bare integer to days."""
    if isinstance(text, int):
        return text
    s = str(text).strip().lower()
    if re.fullmatch(r"-?\d+", s):
        return int(s)
    m = re.fullmatch(r"(\d+)([dwmy])", s)
    if not m:
        raise InputError(f"cannot parse period {text!r}")
    n, unit = int(m.group(1)), m.group(2)
    return n * {"d": 1, "w": 7, "m": DAYS_PER_MONTH, "y": DAYS_PER_YEAR}[unit]


@dataclass(frozen=True)
class Schedule:
    dates: tuple[int, ...]
    accrual_fractions: tuple[float, ...]
    stub: bool = False

    def __post_init__(self):
        if len(self.dates) < 2:
            raise InputError("schedule needs at least two dates")
        if len(self.accrual_fractions) != len(self.dates) - 1:
            raise InputError("schedule needs one accrual fraction per period")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise InputError("schedule dates must be strictly increasing")
        if any(f <= 0 for f in self.accrual_fractions):
            raise InputError("accrual fractions must be positive")

    @property
    def start(self) -> int:
        return self.dates[0]

    @property
    def end(self) -> int:
        return self.dates[-1]

    @property
    def start_times(self) -> tuple[float, ...]:
        return tuple(to_time(d) for d in self.dates[:-1])

    @property
    def end_times(self) -> tuple[float, ...]:
        return tuple(to_time(d) for d in self.dates[1:])

    def __len__(self) -> int:
        return len(self.accrual_fractions)


def make_schedule(
    start: DatePoint,
    end: DatePoint,
    frequency_months: int,
    convention: DayCount | str = DayCount.ACT360,
    adjust: Optional[Callable[[int], int]] = None,
) -> Schedule:
    """Roll backward from ``end`` in steps of ``frequency_months``.

    A span that is not a whole number of periods gets a short first stub, which
    is flagged on the returned schedule. ``adjust`` is the hook for a real
    business-day calendar; it maps unadjusted serials to adjusted ones and must
    keep them strictly increasing.
    """
    if end <= start:
        raise InputError(f"make_schedule: end {end} must be after start {start}")
    if frequency_months not in (1, 3, 6, 12):
        raise InputError(f"unsupported frequency {frequency_months}m")
    step = DAYS_PER_MONTH * frequency_months
    rolled = [end]
    while rolled[-1] - step > start:
        rolled.append(rolled[-1] - step)
    rolled.append(start)
    dates = rolled[::-1]
    stub = (dates[1] - dates[0]) != step
    if adjust is not None:
        dates = [dates[0]] + [adjust(d) for d in dates[1:-1]] + [dates[-1]]
    fractions = tuple(year_fraction(a, b, convention) for a, b in zip(dates, dates[1:]))
    return Schedule(tuple(dates), fractions, stub)
