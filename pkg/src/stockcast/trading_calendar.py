"""Trading calendars: observed trade dates, optionally extended by a weekday rule."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path

from .errors import ConfigurationError, InsufficientCalendarError


@dataclass(frozen=True)
class TradingCalendar:
    """Known trade dates plus an optional Mon-Fri continuation.

    Past the last known date (or when none are known) the calendar continues
    with weekdays that are not listed in ``holidays``.
    """

    trade_dates: tuple[date, ...] = ()
    extend_weekdays: bool = True
    holidays: frozenset[date] = field(default_factory=frozenset)

    def __post_init__(self):
        dates = tuple(sorted(set(self.trade_dates)))
        object.__setattr__(self, "trade_dates", dates)
        object.__setattr__(self, "holidays", frozenset(self.holidays))

    @classmethod
    def weekdays(cls, holidays=()) -> "TradingCalendar":
        return cls((), True, frozenset(holidays))

    @classmethod
    def from_series(cls, *series, extend_weekdays: bool = True, holidays=()) -> "TradingCalendar":
        dates = set()
        for s in series:
            dates.update(s.dates)
        return cls(tuple(dates), extend_weekdays, frozenset(holidays))

    def is_rule_day(self, day: date) -> bool:
        return day.weekday() < 5 and day not in self.holidays


def next_trade_dates(calendar: TradingCalendar, after: date, count: int) -> list[date]:
    """The first ``count`` trade dates strictly after ``after``."""
    if count < 0:
        raise ValueError("count must be non-negative")
    out = [d for d in calendar.trade_dates if d > after][:count]
    if len(out) < count:
        if not calendar.extend_weekdays:
            raise InsufficientCalendarError(f"calendar has only {len(out)} trade dates after {after}, {count} requested")
        day = max([after, *calendar.trade_dates[-1:]])
        while len(out) < count:
            day += timedelta(days=1)
            if calendar.is_rule_day(day):
                out.append(day)
    return out


def trade_dates_between(calendar: TradingCalendar, after: date, end: date) -> list[date]:
    """All trade dates d with after < d <= end."""
    out = [d for d in calendar.trade_dates if after < d <= end]
    if calendar.extend_weekdays:
        day = max([after, *calendar.trade_dates[-1:]])
        while day < end:
            day += timedelta(days=1)
            if calendar.is_rule_day(day):
                out.append(day)
    return out


def parse_holidays(text: str) -> frozenset[date]:
    days = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            days.add(date.fromisoformat(line))
        except ValueError:
            raise ConfigurationError(f"holiday file line {lineno}: bad date {line!r}") from None
    return frozenset(days)


def load_holidays(path) -> frozenset[date]:
    return parse_holidays(Path(path).read_text(encoding="utf-8"))
