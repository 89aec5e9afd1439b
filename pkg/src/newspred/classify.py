"""Headline labeling backends: a local lexicon classifier and a remote LLM
gateway client with a replay cache, plus per-class term-frequency reports.

The gateway speaks the generic JSON-over-HTTP chat-completion shape
{model, messages: [{role, content}]} with one user message per headline and
temperature 0. Responses are parsed by exact match against the prompt's
answer tokens after uppercasing and trimming; anything else is UNKNOWN with
the raw response preserved.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .corpus import HeadlineRecord, Label, LabelRecord
from .errors import TransportError

_TOKEN_RE = re.compile(r"[a-z]+")


def _load_stopwords() -> frozenset[str]:
    text = resources.files("newspred").joinpath("data/stopwords.txt").read_text("utf-8")
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


STOPWORDS = _load_stopwords()


def tokenize(text: str, drop_stopwords: bool = True) -> list[str]:
    """Lowercase, strip digits and punctuation, optionally drop stop-words."""
    toks = _TOKEN_RE.findall(text.lower())
    if drop_stopwords:
        toks = [t for t in toks if t not in STOPWORDS]
    return toks


# ---------------------------------------------------------------------------
# lexicon backend


@dataclass(frozen=True)
class Lexicon:
    positive_terms: frozenset[str]
    negative_terms: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "positive_terms", frozenset(self.positive_terms))
        object.__setattr__(self, "negative_terms", frozenset(self.negative_terms))
        overlap = self.positive_terms & self.negative_terms
        if overlap:
            raise ValueError(f"lexicon term sets overlap: {sorted(overlap)[:5]}")
        for term in self.positive_terms | self.negative_terms:
            if not _TOKEN_RE.fullmatch(term):
                raise ValueError(f"lexicon term {term!r} must be a single lowercase token")
        if not (self.positive_terms or self.negative_terms):
            raise ValueError("lexicon is empty")

    @classmethod
    def from_files(cls, positive_path: str | Path, negative_path: str | Path) -> "Lexicon":
        def load(p):
            out = set()
            for line in Path(p).read_text("utf-8").splitlines():
                line = line.strip().lower()
                if line and not line.startswith("#"):
                    out.add(line)
            return out

        return cls(frozenset(load(positive_path)), frozenset(load(negative_path)))


def lexicon_classify(
    headline: HeadlineRecord,
    lex: Lexicon,
    source: str = "lexicon",
    prompt_id: str = "lexicon",
) -> LabelRecord:
    """UP if positive hits outnumber negative hits, DOWN if the reverse, else UNKNOWN."""
    toks = tokenize(headline.text)
    p = sum(1 for t in toks if t in lex.positive_terms)
    n = sum(1 for t in toks if t in lex.negative_terms)
    if p > n:
        label = Label.UP
    elif n > p:
        label = Label.DOWN
    else:
        label = Label.UNKNOWN
    return LabelRecord(headline.id, label, source, prompt_id)


# ---------------------------------------------------------------------------
# prompt templates


@dataclass(frozen=True)
class PromptTemplate:
    prompt_id: str
    template: str
    answer_map: Mapping[str, Label]

    def __post_init__(self):
        if self.template.count("{headline}") != 1:
            raise ValueError("template must contain the {headline} placeholder exactly once")
        object.__setattr__(
            self, "answer_map", {k.strip().upper(): v for k, v in self.answer_map.items()}
        )
        if len(set(self.answer_map.values())) < 2:
            raise ValueError("answer map must cover at least two distinct labels")

    def render(self, headline_text: str) -> str:
        return self.template.replace("{headline}", headline_text)

    def parse(self, raw_response: str) -> Label:
        return self.answer_map.get(raw_response.strip().upper(), Label.UNKNOWN)


def _directional_template(pos: str, neg: str) -> str:
    return (
        "You are a financial analyst judging one news headline for the U.S. "
        f"stock market. Reply with exactly one of {pos}, {neg}, or UNKNOWN "
        "and nothing else.\n\nHeadline: {headline}"
    )


BUILTIN_PROMPTS: dict[str, PromptTemplate] = {
    t.prompt_id: t
    for t in (
        PromptTemplate(
            "direction-v1",
            _directional_template("GOING UP", "GOING DOWN"),
            {"GOING UP": Label.UP, "GOING DOWN": Label.DOWN, "UNKNOWN": Label.UNKNOWN},
        ),
        PromptTemplate(
            "optimism-v1",
            _directional_template("OPTIMISTIC", "PESSIMISTIC"),
            {"OPTIMISTIC": Label.UP, "PESSIMISTIC": Label.DOWN, "UNKNOWN": Label.UNKNOWN},
        ),
        PromptTemplate(
            "positivity-v1",
            _directional_template("POSITIVE", "NEGATIVE"),
            {"POSITIVE": Label.UP, "NEGATIVE": Label.DOWN, "UNKNOWN": Label.UNKNOWN},
        ),
        PromptTemplate(
            "goodness-v1",
            _directional_template("GOOD", "BAD"),
            {"GOOD": Label.UP, "BAD": Label.DOWN, "UNKNOWN": Label.UNKNOWN},
        ),
    )
}


# ---------------------------------------------------------------------------
# remote gateway


@dataclass(frozen=True)
class RemoteEndpointConfig:
    base_url: str
    model_name: str
    api_key_env_var: str = ""
    max_in_flight: int = 4
    retries: int = 3
    timeout: float = 30.0
    backoff_base: float = 0.5

    @classmethod
    def from_json_file(cls, path: str | Path) -> "RemoteEndpointConfig":
        obj = json.loads(Path(path).read_text("utf-8"))
        return cls(**obj)


@dataclass(frozen=True, slots=True)
class CacheEntry:
    label: Label
    raw_response: str
    timestamp: float


class LabelCache:
    """Append-only JSON-lines cache keyed by (source, prompt_id, headline_id).

    A cached key is never re-requested; writes are atomic per key (single
    flushed line under a lock).
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[tuple[str, str, str], CacheEntry] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    obj = json.loads(line)
                    key = (obj["source"], obj["prompt_id"], obj["headline_id"])
                    self._entries[key] = CacheEntry(
                        Label(obj["label"]), obj["raw_response"], float(obj["timestamp"])
                    )

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, source: str, prompt_id: str, headline_id: str) -> CacheEntry | None:
        return self._entries.get((source, prompt_id, headline_id))

    def put(self, source: str, prompt_id: str, headline_id: str, label: Label, raw: str) -> None:
        entry = CacheEntry(label, raw, time.time())
        with self._lock:
            self._entries[(source, prompt_id, headline_id)] = entry
            if self.path is not None:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(
                        json.dumps(
                            {
                                "source": source,
                                "prompt_id": prompt_id,
                                "headline_id": headline_id,
                                "label": label.value,
                                "raw_response": raw,
                                "timestamp": entry.timestamp,
                            },
                            ensure_ascii=False,
                        )
                        + "\n"
                    )
                    fh.flush()


Transport = Callable[[dict], str]


def _default_transport(endpoint: RemoteEndpointConfig) -> Transport:
    import requests

    headers = {"Content-Type": "application/json"}
    if endpoint.api_key_env_var:
        key = os.environ.get(endpoint.api_key_env_var, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
    url = endpoint.base_url.rstrip("/") + "/chat/completions"

    def send(payload: dict) -> str:
        resp = requests.post(url, json=payload, headers=headers, timeout=endpoint.timeout)
        resp.raise_for_status()
        body = resp.json()
        return body["choices"][0]["message"]["content"]

    return send


def llm_classify(
    headlines: Sequence[HeadlineRecord],
    template: PromptTemplate,
    endpoint: RemoteEndpointConfig,
    cache: LabelCache,
    source: str | None = None,
    transport: Transport | None = None,
    sleeper: Callable[[float], None] = time.sleep,
) -> list[LabelRecord]:
    """Label a batch through the gateway, replaying cached answers.

    Output order matches input order regardless of completion order. A key is
    requested at most once per run. Unparseable responses become UNKNOWN (not
    an error); transport failures surviving all retries raise TransportError
    naming the headline.
    """
    from concurrent.futures import ThreadPoolExecutor

    src = source if source is not None else endpoint.model_name
    send = transport if transport is not None else _default_transport(endpoint)

    pending: list[HeadlineRecord] = []
    seen: set[str] = set()
    for h in headlines:
        if cache.get(src, template.prompt_id, h.id) is None and h.id not in seen:
            pending.append(h)
            seen.add(h.id)

    def fetch(h: HeadlineRecord) -> None:
        payload = {
            "model": endpoint.model_name,
            "messages": [{"role": "user", "content": template.render(h.text)}],
            "temperature": 0,
        }
        last_exc: Exception | None = None
        for attempt in range(endpoint.retries + 1):
            try:
                raw = send(payload)
                cache.put(src, template.prompt_id, h.id, template.parse(raw), raw)
                return
            except Exception as exc:  # noqa: BLE001 - transport is caller-supplied
                last_exc = exc
                if attempt < endpoint.retries:
                    sleeper(endpoint.backoff_base * 2**attempt)
        raise TransportError(
            f"remote call failed for headline {h.id!r} after {endpoint.retries + 1} attempts: {last_exc}"
        )

    if pending:
        workers = max(1, min(endpoint.max_in_flight, len(pending)))
        if workers == 1:
            for h in pending:
                fetch(h)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for _ in pool.map(fetch, pending):
                    pass

    out = []
    for h in headlines:
        entry = cache.get(src, template.prompt_id, h.id)
        out.append(LabelRecord(h.id, entry.label, src, template.prompt_id))
    return out


# ---------------------------------------------------------------------------
# term frequencies


def porter_stem(word: str) -> str:
    """Rule-based suffix stemmer in the Porter style (deterministic, bundled)."""

    if len(word) <= 2:
        return word

    vowels = "aeiou"

    def is_cons(w, i):
        c = w[i]
        if c in vowels:
            return False
        if c == "y":
            return i == 0 or not is_cons(w, i - 1)
        return True

    def measure(w):
        # number of vowel-consonant transitions (the Porter "m")
        m, prev_vowel = 0, False
        for i in range(len(w)):
            v = not is_cons(w, i)
            if prev_vowel and not v:
                m += 1
            prev_vowel = v
        return m

    def has_vowel(w):
        return any(not is_cons(w, i) for i in range(len(w)))

    def ends_double_cons(w):
        return len(w) >= 2 and w[-1] == w[-2] and is_cons(w, len(w) - 1)

    def cvc(w):
        return (
            len(w) >= 3
            and is_cons(w, len(w) - 3)
            and not is_cons(w, len(w) - 2)
            and is_cons(w, len(w) - 1)
            and w[-1] not in "wxy"
        )

    w = word

    # step 1a
    if w.endswith("sses"):
        w = w[:-2]
    elif w.endswith("ies"):
        w = w[:-2]
    elif w.endswith("ss"):
        pass
    elif w.endswith("s"):
        w = w[:-1]

    # step 1b
    if w.endswith("eed"):
        if measure(w[:-3]) > 0:
            w = w[:-1]
    elif w.endswith("ed") and has_vowel(w[:-2]):
        w = w[:-2]
        w = _step1b_fix(w, ends_double_cons, cvc, measure)
    elif w.endswith("ing") and has_vowel(w[:-3]):
        w = w[:-3]
        w = _step1b_fix(w, ends_double_cons, cvc, measure)

    # step 1c
    if w.endswith("y") and has_vowel(w[:-1]):
        w = w[:-1] + "i"

    # step 2 (subset of the classic suffix table)
    for suf, rep in (
        ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
        ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
        ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
        ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
        ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
    ):
        if w.endswith(suf):
            if measure(w[: -len(suf)]) > 0:
                w = w[: -len(suf)] + rep
            break

    # step 3
    for suf, rep in (
        ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
        ("ical", "ic"), ("ful", ""), ("ness", ""),
    ):
        if w.endswith(suf):
            if measure(w[: -len(suf)]) > 0:
                w = w[: -len(suf)] + rep
            break

    # step 4
    for suf in (
        "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
        "ment", "ent", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
    ):
        if w.endswith(suf):
            stem = w[: -len(suf)]
            if measure(stem) > 1:
                w = stem
            break
    else:
        if w.endswith("ion") and measure(w[:-3]) > 1 and w[:-3] and w[-4] in "st":
            w = w[:-3]

    # step 5
    if w.endswith("e"):
        stem = w[:-1]
        if measure(stem) > 1 or (measure(stem) == 1 and not cvc(stem)):
            w = stem
    if ends_double_cons(w) and w.endswith("l") and measure(w) > 1:
        w = w[:-1]

    return w


def _step1b_fix(w, ends_double_cons, cvc, measure):
    if w.endswith(("at", "bl", "iz")):
        return w + "e"
    if ends_double_cons(w) and w[-1] not in "lsz":
        return w[:-1]
    if measure(w) == 1 and cvc(w):
        return w + "e"
    return w


@dataclass(frozen=True, slots=True)
class TermFrequency:
    term: str
    count: int
    frequency: float


def term_frequency_report(
    texts_by_label: Mapping[Label, Iterable[str]],
    min_count: int = 3,
    stem: bool = True,
) -> dict[Label, list[TermFrequency]]:
    """Relative frequency of retained stems per label class, descending.

    Frequencies are relative to all retained tokens in the class; terms whose
    absolute count falls below `min_count` are then excluded from the report.
    An empty class yields an empty table.
    """
    out: dict[Label, list[TermFrequency]] = {}
    for label, texts in texts_by_label.items():
        counts: dict[str, int] = {}
        total = 0
        for text in texts:
            for tok in tokenize(text):
                term = porter_stem(tok) if stem else tok
                counts[term] = counts.get(term, 0) + 1
                total += 1
        rows = [
            TermFrequency(term, c, c / total)
            for term, c in counts.items()
            if c >= min_count
        ]
        rows.sort(key=lambda r: (-r.count, r.term))
        out[label] = rows
    return out
