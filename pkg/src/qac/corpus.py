"""Query-log ingestion: normalization, session dedup, time splits,
background frequencies, suffix extraction and training-pair construction."""

from __future__ import annotations

import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

# Unit separator, used to join negative candidates in pairs.tsv.
US = "\x1f"

MIN_BACKGROUND_FREQ = 3


@dataclass
class LogRecord:
    session_id: str
    query_text: str
    timestamp: float


@dataclass
class CorpusSplit:
    background: list  # LogRecord
    train: list
    validation: list
    test: list


@dataclass
class TrainingPair:
    prefix: str
    positive: str
    negatives: list


def normalize_query(raw: str) -> list:
    """Lowercase, trim and split on whitespace runs. Punctuation stays
    inside tokens. All-whitespace input yields [] (caller drops the record)."""
    return raw.lower().split()


def normalize_prefix(raw: str) -> str:
    """Normalize a user prefix the same way queries are normalized, but keep
    a single trailing space when the input ends mid-whitespace: it marks the
    last word as complete and changes generation semantics."""
    tokens = normalize_query(raw)
    if not tokens:
        return ""
    text = " ".join(tokens)
    if raw != raw.rstrip():
        text += " "
    return text


def dedupe_adjacent(records: list) -> list:
    """Collapse runs of identical normalized query text within one
    time-ordered session, keeping the first record of each run."""
    out = []
    prev = None
    for rec in records:
        key = " ".join(normalize_query(rec.query_text))
        if key != prev:
            out.append(rec)
        prev = key
    return out


def split_by_time(records: list, boundaries: tuple) -> CorpusSplit:
    """Assign each record to background / train / validation / test by
    half-open time windows [start, b0), [b0, b1), [b1, b2), [b2, inf)."""
    b0, b1, b2 = boundaries
    if not (b0 < b1 < b2):
        raise ValueError(f"boundaries must be strictly increasing: {boundaries}")
    split = CorpusSplit([], [], [], [])
    for rec in records:
        if rec.timestamp < b0:
            split.background.append(rec)
        elif rec.timestamp < b1:
            split.train.append(rec)
        elif rec.timestamp < b2:
            split.validation.append(rec)
        else:
            split.test.append(rec)
    return split


def count_frequencies(records: list, min_freq: int = MIN_BACKGROUND_FREQ) -> dict:
    """Per-distinct normalized query counts over background records,
    dropping queries with frequency below `min_freq`."""
    counts = Counter()
    for rec in records:
        tokens = normalize_query(rec.query_text)
        if tokens:
            counts[" ".join(tokens)] += 1
    return {q: c for q, c in counts.items() if c >= min_freq}


def extract_top_suffixes(background: dict, limit: int) -> dict:
    """All word-level suffixes of background queries, weighted by query
    frequency; the `limit` most frequent kept. Ties at the cutoff break by
    lexicographic suffix order for determinism."""
    if limit < 1:
        raise ValueError("limit must be >= 1")
    counts = defaultdict(int)
    for text, freq in background.items():
        tokens = text.split()
        for i in range(len(tokens)):
            counts[" ".join(tokens[i:])] += freq
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return dict(ranked[:limit])


def sample_prefix(tokens: list, rng: random.Random) -> str:
    """Sample a prefix: uniform word boundary, then a uniform character cut
    inside the last sampled word (the cut may complete the word)."""
    j = rng.randint(1, len(tokens))
    word = tokens[j - 1]
    c = rng.randint(1, len(word))
    head = tokens[: j - 1] + [word[:c]]
    return " ".join(head)


def make_training_pairs(queries: list, generator, k: int = 10,
                        seed: int = 0) -> list:
    """Build pairwise training data: for each query sample one prefix, run
    the candidate generator, and emit a pair only when the true query shows
    up in the candidate list."""
    rng = random.Random(seed)
    pairs = []
    for text in queries:
        tokens = text.split() if isinstance(text, str) else list(text)
        if not tokens:
            continue
        text = " ".join(tokens)
        prefix = sample_prefix(tokens, rng)
        candidates = generator(prefix, k)
        cand_texts = [c.text for c in candidates]
        if text in cand_texts:
            negatives = [t for t in cand_texts if t != text]
            pairs.append(TrainingPair(prefix=prefix, positive=text,
                                      negatives=negatives))
    return pairs


# --- log file parsing ---------------------------------------------------

def _parse_timestamp(value: str) -> float:
    try:
        return float(value)
    except ValueError:
        dt = datetime.fromisoformat(value)
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return dt.timestamp()


def read_log_file(path, fmt: str = "tsv") -> list:
    """Read a query log. fmt="tsv" expects session_id, query_text, timestamp;
    fmt="aol" expects the AOL column layout (AnonID, Query, QueryTime, ...)
    with a header line."""
    records = []
    with open(path, encoding="utf-8") as fh:
        lines = iter(fh)
        if fmt == "aol":
            next(lines, None)  # header
        for line in lines:
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) < 3:
                continue
            sid, text, ts = cols[0], cols[1], cols[2]
            if not normalize_query(text):
                continue
            records.append(LogRecord(sid, text, _parse_timestamp(ts)))
    return records


def sessionize(records: list) -> list:
    """Group by session, sort by time within each, and dedupe adjacent
    identical queries. Returns a flat record list."""
    sessions = defaultdict(list)
    for rec in records:
        sessions[rec.session_id].append(rec)
    out = []
    for sid in sessions:
        ordered = sorted(sessions[sid], key=lambda r: r.timestamp)
        out.extend(dedupe_adjacent(ordered))
    return out


# --- line-oriented output files ------------------------------------------

def write_frequency_file(path, counts: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for text, freq in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
            fh.write(f"{text}\t{freq}\n")


def read_frequency_file(path) -> dict:
    counts = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            text, freq = line.rsplit("\t", 1)
            counts[text] = int(freq)
    return counts


def write_pairs_file(path, pairs: list) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(f"{p.prefix}\t{p.positive}\t{US.join(p.negatives)}\n")


def read_pairs_file(path) -> list:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            prefix, positive, negs = line.split("\t")
            negatives = [n for n in negs.split(US) if n]
            pairs.append(TrainingPair(prefix, positive, negatives))
    return pairs
