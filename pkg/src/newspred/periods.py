"""Aligned period-indexed series and the window operations shared by every module.

Periods are integer ordinals at a uniform frequency (monthly, weekly, quarterly),
so an index is just (frequency, start ordinal, length) and alignment is interval
intersection. No calendar arithmetic beyond the ordinal maps lives here.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .errors import (
    AlignmentError,
    DegenerateSeriesError,
    FrequencyMismatchError,
    InsufficientDataError,
)


class Frequency(enum.Enum):
    MONTHLY = "monthly"
    WEEKLY = "weekly"
    QUARTERLY = "quarterly"


_MONTHLY_RE = re.compile(r"^(\d{4})-(\d{2})$")
_QUARTERLY_RE = re.compile(r"^(\d{4})Q([1-4])$")
_WEEKLY_RE = re.compile(r"^(\d{4})-W(\d{2})$")


@dataclass(frozen=True, order=True, slots=True)
class Period:
    """One period: a frequency plus an integer ordinal from a fixed epoch."""

    frequency: Frequency = field(compare=False)
    ordinal: int

    def __post_init__(self):
        if not isinstance(self.ordinal, int):
            object.__setattr__(self, "ordinal", int(self.ordinal))

    @property
    def label(self) -> str:
        return format_period(self.frequency, self.ordinal)

    def shift(self, k: int) -> "Period":
        return Period(self.frequency, self.ordinal + k)

    def __str__(self) -> str:
        return self.label


def period_of_date(d: date, frequency: Frequency) -> Period:
    """Map a calendar day to the period containing it."""
    if frequency is Frequency.MONTHLY:
        return Period(frequency, d.year * 12 + (d.month - 1))
    if frequency is Frequency.QUARTERLY:
        return Period(frequency, d.year * 4 + (d.month - 1) // 3)
    # ISO week; Mondays have toordinal() == 1 (mod 7) so floor division is stable
    iso = d.isocalendar()
    monday = date.fromisocalendar(iso[0], iso[1], 1)
    return Period(frequency, monday.toordinal() // 7)


def parse_period(label: str) -> Period:
    """Parse 'YYYY-MM', 'YYYYQn', or 'YYYY-Wnn' into a Period (frequency inferred)."""
    m = _MONTHLY_RE.match(label)
    if m:
        y, mo = int(m.group(1)), int(m.group(2))
        if not 1 <= mo <= 12:
            raise ValueError(f"bad month in period label {label!r}")
        return Period(Frequency.MONTHLY, y * 12 + mo - 1)
    m = _QUARTERLY_RE.match(label)
    if m:
        return Period(Frequency.QUARTERLY, int(m.group(1)) * 4 + int(m.group(2)) - 1)
    m = _WEEKLY_RE.match(label)
    if m:
        monday = date.fromisocalendar(int(m.group(1)), int(m.group(2)), 1)
        return Period(Frequency.WEEKLY, monday.toordinal() // 7)
    raise ValueError(f"unrecognized period label {label!r}")


def format_period(frequency: Frequency, ordinal: int) -> str:
    if frequency is Frequency.MONTHLY:
        return f"{ordinal // 12:04d}-{ordinal % 12 + 1:02d}"
    if frequency is Frequency.QUARTERLY:
        return f"{ordinal // 4:04d}Q{ordinal % 4 + 1}"
    iso = date.fromordinal(ordinal * 7 + 1).isocalendar()
    return f"{iso[0]:04d}-W{iso[1]:02d}"


@dataclass(frozen=True, slots=True)
class PeriodIndex:
    """A gap-free run of periods at one frequency."""

    frequency: Frequency
    start: int
    length: int

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("index length must be non-negative")

    @property
    def stop(self) -> int:
        return self.start + self.length

    def __len__(self) -> int:
        return self.length

    def __iter__(self):
        for o in range(self.start, self.stop):
            yield Period(self.frequency, o)

    def __getitem__(self, i: int) -> Period:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return Period(self.frequency, self.start + i)

    def labels(self) -> list[str]:
        return [format_period(self.frequency, o) for o in range(self.start, self.stop)]

    def position(self, p: Period | str) -> int:
        p = parse_period(p) if isinstance(p, str) else p
        if p.frequency is not self.frequency:
            raise FrequencyMismatchError(
                f"period {p.label} is {p.frequency.value}, index is {self.frequency.value}"
            )
        i = p.ordinal - self.start
        if not 0 <= i < self.length:
            raise AlignmentError(f"period {p.label} outside index range")
        return i

    def truncate(self, drop_end: int = 0, drop_start: int = 0) -> "PeriodIndex":
        n = self.length - drop_end - drop_start
        if n < 0:
            raise InsufficientDataError("truncation longer than index")
        return PeriodIndex(self.frequency, self.start + drop_start, n)


def _as_readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != 1:
        raise ValueError("series values must be one-dimensional")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PeriodSeries:
    """An aligned, gap-free series of real values; immutable after construction."""

    index: PeriodIndex
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_readonly(self.values))
        if len(self.values) != self.index.length:
            raise AlignmentError(
                f"series has {len(self.values)} values but index length {self.index.length}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("series values must be finite")

    @classmethod
    def from_labels(cls, labels, values) -> "PeriodSeries":
        periods = [parse_period(l) if isinstance(l, str) else l for l in labels]
        if not periods:
            raise InsufficientDataError("empty series")
        freq = periods[0].frequency
        ords = [p.ordinal for p in periods]
        for p in periods[1:]:
            if p.frequency is not freq:
                raise FrequencyMismatchError("mixed frequencies in series labels")
        if any(b - a != 1 for a, b in zip(ords, ords[1:])):
            raise AlignmentError("period labels must be strictly increasing and gap-free")
        return cls(PeriodIndex(freq, ords[0], len(ords)), values)

    @classmethod
    def from_start(cls, start: Period | str, values) -> "PeriodSeries":
        p = parse_period(start) if isinstance(start, str) else start
        return cls(PeriodIndex(p.frequency, p.ordinal, len(values)), values)

    def __len__(self) -> int:
        return self.index.length

    @property
    def frequency(self) -> Frequency:
        return self.index.frequency

    @property
    def start(self) -> Period:
        return self.index[0]

    @property
    def end(self) -> Period:
        return self.index[len(self) - 1]

    def value_at(self, p: Period | str) -> float:
        return float(self.values[self.index.position(p)])

    def window(self, start: Period | str | None = None, end: Period | str | None = None) -> "PeriodSeries":
        """Slice to [start, end] inclusive; None leaves that edge open."""
        i = 0 if start is None else self.index.position(start)
        j = len(self) - 1 if end is None else self.index.position(end)
        if j < i:
            raise AlignmentError("window end precedes window start")
        return PeriodSeries(
            PeriodIndex(self.frequency, self.index.start + i, j - i + 1),
            self.values[i : j + 1],
        )

    def replace_values(self, values) -> "PeriodSeries":
        return PeriodSeries(self.index, values)


def align(*series: PeriodSeries) -> list[PeriodSeries]:
    """Truncate all series to the maximal common contiguous index range.

    Already-aligned inputs are returned unchanged (same objects).
    """
    if not series:
        return []
    freq = series[0].frequency
    for s in series[1:]:
        if s.frequency is not freq:
            raise FrequencyMismatchError(
                f"cannot align {s.frequency.value} with {freq.value} series"
            )
    lo = max(s.index.start for s in series)
    hi = min(s.index.stop for s in series)
    if hi <= lo:
        raise AlignmentError("series have no overlapping periods")
    if all(s.index.start == lo and s.index.stop == hi for s in series):
        return list(series)
    out = []
    for s in series:
        i = lo - s.index.start
        out.append(PeriodSeries(PeriodIndex(freq, lo, hi - lo), s.values[i : i + hi - lo]))
    return out


def horizon_average(r: PeriodSeries, h: int) -> PeriodSeries:
    """Forward h-period mean: value at t is mean(r[t+1 .. t+h]).

    The output index is the input index truncated by h at the end. h = 0 is the
    contemporaneous case and is handled by callers (output would equal the input).
    """
    if h < 1:
        raise ValueError("horizon must be >= 1")
    if h >= len(r):
        raise InsufficientDataError(f"horizon {h} needs more than {h} observations, have {len(r)}")
    v = r.values
    if h == 1:
        out = v[1:]  # exact one-period lead, no summation round-off
    else:
        csum = np.concatenate([[0.0], np.cumsum(v)])
        out = (csum[1 + h :] - csum[1 : len(v) - h + 1]) / h
    return PeriodSeries(r.index.truncate(drop_end=h), out)


def standardize(x: PeriodSeries) -> PeriodSeries:
    """Rescale to sample mean 0 and unbiased (n-1) standard deviation 1."""
    if len(x) < 2:
        raise InsufficientDataError("standardize needs at least 2 observations")
    sd = float(np.std(x.values, ddof=1))
    if sd == 0.0:
        raise DegenerateSeriesError("cannot standardize a zero-variance series")
    return x.replace_values((x.values - np.mean(x.values)) / sd)


@dataclass(frozen=True)
class StateDummy:
    """0/1 state indicator: 1 when the base series exceeds its trailing mean."""

    base: PeriodSeries
    window_periods: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_readonly(self.values))
        if len(self.values) != len(self.base):
            raise AlignmentError("dummy length must match base series")
        if not np.all((self.values == 0.0) | (self.values == 1.0)):
            raise ValueError("dummy values must be 0 or 1")

    @property
    def index(self) -> PeriodIndex:
        return self.base.index

    def high_series(self) -> PeriodSeries:
        return PeriodSeries(self.base.index, self.values)

    def low_series(self) -> PeriodSeries:
        # complementarity: low = 1 - high at every t
        return PeriodSeries(self.base.index, 1.0 - self.values)


def trailing_mean_dummy(x: PeriodSeries, window: int) -> StateDummy:
    """1 when x[t] strictly exceeds the mean of the prior `window` observations.

    The current observation is excluded from the mean. With fewer than `window`
    prior observations the mean expands over whatever history exists; the first
    observation has no history and gets 0. Ties go to the low state.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    v = x.values
    out = np.zeros(len(v))
    csum = np.concatenate([[0.0], np.cumsum(v)])
    for t in range(1, len(v)):
        lo = max(0, t - window)
        mean_prior = (csum[t] - csum[lo]) / (t - lo)
        if v[t] > mean_prior:
            out[t] = 1.0
    return StateDummy(base=x, window_periods=window, values=out)
