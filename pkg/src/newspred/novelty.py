"""Embedding ingestion, per-period mean vectors, novelty scores, and
similarity state dummies.

Similarity between two period-mean embeddings is the Pearson correlation
across their components (each vector centered by its own component mean);
cosine similarity is available as a configurable alternative. Embeddings are
always ingested from files, never generated here.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .classify import tokenize
from .corpus import HeadlineRecord
from .errors import DegenerateSeriesError, InsufficientDataError
from .periods import Period, PeriodIndex, PeriodSeries, StateDummy, parse_period, trailing_mean_dummy


@dataclass(frozen=True)
class EmbeddingRecord:
    headline_id: str
    vector: np.ndarray

    def __post_init__(self):
        v = np.array(self.vector, dtype=float, copy=True)
        if v.ndim != 1 or len(v) < 2:
            raise ValueError("embedding vectors must be 1-D with dimension >= 2")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"embedding for {self.headline_id!r} has non-finite components")
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)


@dataclass(frozen=True)
class PeriodEmbedding:
    period: Period
    mean_vector: np.ndarray


def period_mean(records: Iterable[tuple[Period, EmbeddingRecord]]) -> list[PeriodEmbedding]:
    """Componentwise mean embedding per period, periods gap-free and ordered.

    Raises naming the first period in the covered range that has no records.
    """
    by_period: dict[int, list[np.ndarray]] = {}
    freq = None
    dim = None
    for p, rec in records:
        if freq is None:
            freq = p.frequency
            dim = len(rec.vector)
        elif p.frequency is not freq:
            raise ValueError("mixed frequencies in embedding records")
        if len(rec.vector) != dim:
            raise ValueError(
                f"embedding dimension {len(rec.vector)} for {rec.headline_id!r}, corpus uses {dim}"
            )
        by_period.setdefault(p.ordinal, []).append(rec.vector)
    if not by_period:
        raise InsufficientDataError("no embedding records")
    lo, hi = min(by_period), max(by_period)
    out = []
    for o in range(lo, hi + 1):
        if o not in by_period:
            raise InsufficientDataError(f"period {Period(freq, o).label} has no embeddings")
        out.append(PeriodEmbedding(Period(freq, o), np.mean(by_period[o], axis=0)))
    return out


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    ac = a - a.mean()
    bc = b - b.mean()
    na = float(ac @ ac)
    nb = float(bc @ bc)
    if na == 0.0 or nb == 0.0:
        raise DegenerateSeriesError("zero-variance mean embedding; correlation undefined")
    return float(ac @ bc) / np.sqrt(na * nb)


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = float(a @ a)
    nb = float(b @ b)
    if na == 0.0 or nb == 0.0:
        raise DegenerateSeriesError("zero mean embedding; cosine undefined")
    return float(a @ b) / np.sqrt(na * nb)


def novelty_score(
    means: Sequence[PeriodEmbedding],
    lookback: int = 5,
    metric: str = "pearson",
) -> PeriodSeries:
    """1 minus the maximum similarity to the previous `lookback` period means.

    Early periods compare against however many predecessors exist (at least
    one), so the output starts at the second period and stays aligned with
    return series thereafter.
    """
    if len(means) < 2:
        raise InsufficientDataError("novelty needs at least 2 periods")
    if lookback < 1:
        raise ValueError("lookback must be >= 1")
    sim = {"pearson": _pearson, "cosine": _cosine}[metric]
    vecs = [m.mean_vector for m in means]
    vals = []
    for t in range(1, len(vecs)):
        best = max(sim(vecs[t], vecs[t - j]) for j in range(1, min(lookback, t) + 1))
        vals.append(1.0 - best)
    index = PeriodIndex(means[0].period.frequency, means[1].period.ordinal, len(vals))
    return PeriodSeries(index, vals)


def similarity_dummy(
    means: Sequence[PeriodEmbedding],
    window: int = 60,
    lookback: int = 5,
    metric: str = "pearson",
) -> StateDummy:
    """High-similarity state: 1 - novelty compared against its trailing mean."""
    nov = novelty_score(means, lookback, metric)
    similarity = nov.replace_values(1.0 - nov.values)
    return trailing_mean_dummy(similarity, window)


# ---------------------------------------------------------------------------
# economic-relevance keyword filter

ECONOMIC_KEYWORDS = (
    "dow jones",
    "stock exchange",
    "stock prices",
    "stock market",
    "nasdaq market",
    "nasdaq stock",
    "security exchange",
    "security price",
    "security market",
    "interest rate",
    "debt market",
    "security",
    "market",
    "economy",
    "fed",
    "bank",
    "finance",
    "monetary",
)

_KEYWORD_TOKENS = tuple(tuple(tokenize(k, drop_stopwords=False)) for k in ECONOMIC_KEYWORDS)


def is_economic(text: str) -> bool:
    """Case-insensitive token match; multi-word keywords must appear as
    adjacent tokens."""
    toks = tokenize(text, drop_stopwords=False)
    for kw in _KEYWORD_TOKENS:
        k = len(kw)
        if k == 1:
            if kw[0] in toks:
                return True
        else:
            for i in range(len(toks) - k + 1):
                if tuple(toks[i : i + k]) == kw:
                    return True
    return False


def filter_economic(headlines: Iterable[HeadlineRecord]) -> list[HeadlineRecord]:
    return [h for h in headlines if is_economic(h.text)]


# ---------------------------------------------------------------------------
# file IO


def read_embeddings_jsonl(path: str | Path) -> list[tuple[Period, EmbeddingRecord]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                rec = EmbeddingRecord(str(obj["headline_id"]), np.array(obj["vector"], dtype=float))
                out.append((parse_period(obj["period"]), rec))
            except (KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad embedding record: {exc}") from exc
    return out


def write_embeddings_jsonl(path: str | Path, records: Iterable[tuple[Period, EmbeddingRecord]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p, rec in records:
            fh.write(
                json.dumps(
                    {
                        "headline_id": rec.headline_id,
                        "period": p.label,
                        "vector": [float(v) for v in rec.vector],
                    }
                )
                + "\n"
            )


def write_embeddings_binary(path: str | Path, records: Sequence[tuple[Period, EmbeddingRecord]]) -> None:
    """Little-endian float32 rows plus a JSON sidecar (<path>.json) carrying the
    dimension, row count, and row identities."""
    path = Path(path)
    if not records:
        raise InsufficientDataError("no embedding records to write")
    dim = len(records[0][1].vector)
    with open(path, "wb") as fh:
        for _, rec in records:
            if len(rec.vector) != dim:
                raise ValueError("all rows must share one dimension")
            fh.write(struct.pack(f"<{dim}f", *rec.vector))
    sidecar = {
        "dim": dim,
        "rows": len(records),
        "headline_ids": [rec.headline_id for _, rec in records],
        "periods": [p.label for p, _ in records],
    }
    Path(str(path) + ".json").write_text(json.dumps(sidecar) + "\n", "utf-8")


def read_embeddings_binary(path: str | Path) -> list[tuple[Period, EmbeddingRecord]]:
    path = Path(path)
    sidecar = json.loads(Path(str(path) + ".json").read_text("utf-8"))
    dim, rows = int(sidecar["dim"]), int(sidecar["rows"])
    raw = path.read_bytes()
    if len(raw) != rows * dim * 4:
        raise ValueError(f"{path}: expected {rows}x{dim} float32 rows, got {len(raw)} bytes")
    out = []
    for i in range(rows):
        vec = struct.unpack_from(f"<{dim}f", raw, i * dim * 4)
        rec = EmbeddingRecord(sidecar["headline_ids"][i], np.array(vec, dtype=float))
        out.append((parse_period(sidecar["periods"][i]), rec))
    return out


def read_embeddings(path: str | Path) -> list[tuple[Period, EmbeddingRecord]]:
    """Dispatch on extension: .jsonl is line-JSON, anything else is binary rows."""
    if str(path).endswith(".jsonl"):
        return read_embeddings_jsonl(path)
    return read_embeddings_binary(path)
