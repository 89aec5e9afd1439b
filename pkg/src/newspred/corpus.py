"""Headline and label ingestion, per-period counts, and good/bad news ratios.

File formats (external contract):
  headlines   JSON lines, one object per line: {"id": str, "date": "YYYY-MM-DD", "text": str}
  labels      CSV with header headline_id,label,source,prompt_id; label in {UP,DOWN,UNKNOWN}
  counts      CSV: period,n_up,n_down,n_unknown,n_total
  ratios      CSV: period,nr_good,nr_bad
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass
from datetime import date, datetime
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateRecordError,
    InsufficientDataError,
    ReferentialError,
    ZeroDenominatorError,
)
from .periods import Frequency, Period, PeriodIndex, PeriodSeries, period_of_date


class Label(enum.Enum):
    UP = "UP"
    DOWN = "DOWN"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True, slots=True)
class HeadlineRecord:
    id: str
    date: date
    text: str

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError(f"headline {self.id!r} has empty text")


@dataclass(frozen=True, slots=True)
class LabelRecord:
    headline_id: str
    label: Label
    source: str
    prompt_id: str


@dataclass(frozen=True, slots=True)
class PeriodCounts:
    period: Period
    n_up: int
    n_down: int
    n_unknown: int
    n_total: int

    def __post_init__(self):
        if self.n_up + self.n_down + self.n_unknown != self.n_total:
            raise ValueError(f"counts for {self.period.label} do not sum to n_total")
        if min(self.n_up, self.n_down, self.n_unknown) < 0:
            raise ValueError("counts must be non-negative")


@dataclass(frozen=True)
class NewsRatios:
    nr_good: PeriodSeries
    nr_bad: PeriodSeries

    def __post_init__(self):
        g, b = self.nr_good.values, self.nr_bad.values
        if self.nr_good.index != self.nr_bad.index:
            raise ValueError("good and bad ratio series must share one index")
        if np.any(g < 0) or np.any(b < 0) or np.any(g + b > 1 + 1e-12):
            raise ValueError("ratios must lie in [0,1] with nr_good + nr_bad <= 1")


def aggregate(
    headlines: Iterable[HeadlineRecord],
    labels: Iterable[LabelRecord],
    frequency: Frequency = Frequency.MONTHLY,
    source: str | None = None,
    prompt_id: str | None = None,
) -> list[PeriodCounts]:
    """Bucket headlines by calendar period and count labels.

    Labels are filtered to one (source, prompt_id) pair; when the label set
    contains exactly one pair it is selected automatically, otherwise both
    selectors must be given. Headlines without a label under the selected pair
    count as UNKNOWN. Periods between the first and last headline with no
    headlines at all are emitted with zero counts.
    """
    headlines = list(headlines)
    labels = list(labels)
    ids = {h.id for h in headlines}
    if len(ids) != len(headlines):
        raise DuplicateRecordError("duplicate headline ids in corpus")

    seen_keys = set()
    pairs = set()
    for rec in labels:
        key = (rec.headline_id, rec.source, rec.prompt_id)
        if key in seen_keys:
            raise DuplicateRecordError(
                f"duplicate label for headline {rec.headline_id!r} "
                f"under ({rec.source!r}, {rec.prompt_id!r})"
            )
        seen_keys.add(key)
        if rec.headline_id not in ids:
            raise ReferentialError(f"label references unknown headline {rec.headline_id!r}")
        pairs.add((rec.source, rec.prompt_id))

    if source is None and prompt_id is None and len(pairs) == 1:
        source, prompt_id = next(iter(pairs))
    elif labels and (source is None or prompt_id is None):
        if len(pairs) > 1:
            raise ValueError(
                "label set contains multiple (source, prompt_id) pairs; pass both selectors"
            )
        source, prompt_id = next(iter(pairs)) if pairs else (source, prompt_id)

    by_id = {
        rec.headline_id: rec.label
        for rec in labels
        if rec.source == source and rec.prompt_id == prompt_id
    }

    if not headlines:
        return []
    buckets: dict[int, list[int]] = {}
    freq = frequency
    for h in headlines:
        p = period_of_date(h.date, freq)
        b = buckets.setdefault(p.ordinal, [0, 0, 0])
        lab = by_id.get(h.id, Label.UNKNOWN)
        if lab is Label.UP:
            b[0] += 1
        elif lab is Label.DOWN:
            b[1] += 1
        else:
            b[2] += 1

    lo, hi = min(buckets), max(buckets)
    out = []
    for o in range(lo, hi + 1):
        up, down, unk = buckets.get(o, (0, 0, 0))
        out.append(PeriodCounts(Period(freq, o), up, down, unk, up + down + unk))
    return out


def ratios(counts: Sequence[PeriodCounts]) -> NewsRatios:
    """nr_good = n_up/n_total and nr_bad = n_down/n_total per period."""
    if not counts:
        raise InsufficientDataError("no period counts")
    for c in counts:
        if c.n_total == 0:
            raise ZeroDenominatorError(f"period {c.period.label} has zero headlines")
    index = PeriodIndex(counts[0].period.frequency, counts[0].period.ordinal, len(counts))
    for c, p in zip(counts, index):
        if c.period != p:
            raise InsufficientDataError("period counts must be contiguous and ordered")
    good = np.array([c.n_up / c.n_total for c in counts])
    bad = np.array([c.n_down / c.n_total for c in counts])
    return NewsRatios(PeriodSeries(index, good), PeriodSeries(index, bad))


@dataclass(frozen=True, slots=True)
class CategoryStats:
    mean: float
    std: float
    skewness: float
    median: float
    min: float
    max: float
    total: int


def _sample_skewness(x: np.ndarray) -> float:
    # adjusted Fisher-Pearson; defined as 0 for zero-variance input
    n = len(x)
    m = x.mean()
    m2 = np.mean((x - m) ** 2)
    if m2 == 0.0:
        return 0.0
    g1 = np.mean((x - m) ** 3) / m2**1.5
    return float(g1 * np.sqrt(n * (n - 1)) / (n - 2))


def summary_stats(counts: Sequence[PeriodCounts]) -> dict[str, CategoryStats]:
    """Moment table per category (total, up, down, unknown), n-1 std."""
    if len(counts) < 3:
        raise InsufficientDataError("summary statistics need at least 3 periods")
    cols = {
        "total": np.array([c.n_total for c in counts], dtype=float),
        "up": np.array([c.n_up for c in counts], dtype=float),
        "down": np.array([c.n_down for c in counts], dtype=float),
        "unknown": np.array([c.n_unknown for c in counts], dtype=float),
    }
    out = {}
    for name, x in cols.items():
        out[name] = CategoryStats(
            mean=float(x.mean()),
            std=float(x.std(ddof=1)),
            skewness=_sample_skewness(x),
            median=float(np.median(x)),
            min=float(x.min()),
            max=float(x.max()),
            total=int(x.sum()),
        )
    return out


# ---------------------------------------------------------------------------
# file IO


def read_headlines_jsonl(path: str | Path) -> list[HeadlineRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                rec = HeadlineRecord(
                    id=str(obj["id"]),
                    date=datetime.strptime(obj["date"], "%Y-%m-%d").date(),
                    text=str(obj["text"]),
                )
            except (KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad headline record: {exc}") from exc
            out.append(rec)
    return out


def write_headlines_jsonl(path: str | Path, headlines: Iterable[HeadlineRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for h in headlines:
            fh.write(
                json.dumps(
                    {"id": h.id, "date": h.date.isoformat(), "text": h.text},
                    ensure_ascii=False,
                )
                + "\n"
            )


LABELS_HEADER = ["headline_id", "label", "source", "prompt_id"]


def read_labels_csv(path: str | Path) -> list[LabelRecord]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != LABELS_HEADER:
            raise ValueError(f"{path}: expected header {','.join(LABELS_HEADER)}")
        for row in reader:
            if not row:
                continue
            hid, lab, source, pid = row
            out.append(LabelRecord(hid, Label(lab), source, pid))
    return out


def write_labels_csv(path: str | Path, labels: Iterable[LabelRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(LABELS_HEADER)
        for rec in labels:
            w.writerow([rec.headline_id, rec.label.value, rec.source, rec.prompt_id])


COUNTS_HEADER = ["period", "n_up", "n_down", "n_unknown", "n_total"]


def write_counts_csv(path: str | Path, counts: Sequence[PeriodCounts]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(COUNTS_HEADER)
        for c in counts:
            w.writerow([c.period.label, c.n_up, c.n_down, c.n_unknown, c.n_total])


def read_counts_csv(path: str | Path) -> list[PeriodCounts]:
    from .periods import parse_period

    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != COUNTS_HEADER:
            raise ValueError(f"{path}: expected header {','.join(COUNTS_HEADER)}")
        for row in reader:
            if not row:
                continue
            p = parse_period(row[0])
            out.append(PeriodCounts(p, int(row[1]), int(row[2]), int(row[3]), int(row[4])))
    return out


RATIOS_HEADER = ["period", "nr_good", "nr_bad"]


def write_ratios_csv(path: str | Path, r: NewsRatios) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(RATIOS_HEADER)
        for p, g, b in zip(r.nr_good.index, r.nr_good.values, r.nr_bad.values):
            w.writerow([p.label, repr(float(g)), repr(float(b))])


def read_ratios_csv(path: str | Path) -> NewsRatios:
    labels, good, bad = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RATIOS_HEADER:
            raise ValueError(f"{path}: expected header {','.join(RATIOS_HEADER)}")
        for row in reader:
            if not row:
                continue
            labels.append(row[0])
            good.append(float(row[1]))
            bad.append(float(row[2]))
    return NewsRatios(
        PeriodSeries.from_labels(labels, good), PeriodSeries.from_labels(labels, bad)
    )


SERIES_HEADER_PREFIX = "period"


def write_series_csv(path: str | Path, series: PeriodSeries, name: str) -> None:
    """Generic one-column series file: period,<name>."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["period", name])
        for p, v in zip(series.index, series.values):
            w.writerow([p.label, repr(float(v))])


def read_series_csv(path: str | Path, column: str | None = None) -> PeriodSeries:
    """Read a series file; `column` selects among value columns (default: first)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "period" or len(header) < 2:
            raise ValueError(f"{path}: expected a 'period,<name>,...' header")
        if column is None:
            col = 1
        else:
            try:
                col = header.index(column)
            except ValueError:
                raise ValueError(f"{path}: no column named {column!r}") from None
        labels, vals = [], []
        for row in reader:
            if not row:
                continue
            labels.append(row[0])
            vals.append(float(row[col]))
    return PeriodSeries.from_labels(labels, vals)
