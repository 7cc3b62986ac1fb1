"""Candidate generation: MostPopularCompletion, LastWordGeneration and
MaximumContextGeneration over the query and suffix indexes.

Prefix semantics: matching is byte-wise on the normalized prefix string,
including internal single spaces. A trailing space marks the last word as
complete; the in-progress word is then empty, and empty-remainder suffix
lookups return nothing (they would otherwise match the whole suffix table).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional


class Source(enum.Enum):
    QUERY = "query"
    SUFFIX = "suffix"


@dataclass
class Candidate:
    text: str
    source: Source
    context_words_matched: int
    frequency: int
    neural_score: Optional[float] = None


DEFAULT_K = 10


def _split_prefix(prefix: str):
    """Words of the prefix and whether it ends at a word boundary."""
    words = prefix.split()
    trailing = bool(words) and prefix.endswith(" ")
    return words, trailing


def _dedup_truncate(candidates, k):
    seen = set()
    out = []
    for cand in candidates:
        if cand.text not in seen:
            seen.add(cand.text)
            out.append(cand)
            if len(out) == k:
                break
    return out


def mpc(query_index, prefix: str, k: int = DEFAULT_K):
    """Top-k most frequent background queries starting with the prefix."""
    return [Candidate(r.text, Source.QUERY, 0, r.frequency)
            for r in query_index.top_k(prefix, k)]


def lwg(query_index, suffix_index, prefix: str, k: int = DEFAULT_K):
    """Query-index results first, then suffixes matched against the last
    (possibly incomplete) word, prepended with the preceding words."""
    out = mpc(query_index, prefix, k)
    words, trailing = _split_prefix(prefix)
    if words and not trailing:
        head = " ".join(words[:-1])
        for r in suffix_index.top_k(words[-1], k):
            text = f"{head} {r.text}" if head else r.text
            out.append(Candidate(text, Source.SUFFIX, 1, r.frequency))
    return _dedup_truncate(out, k)


def mcg(query_index, suffix_index, prefix: str, k: int = DEFAULT_K):
    """Maximum-context generation: start from the query-index results, then
    repeatedly drop the leading word and match the remaining prefix against
    the suffix index, prepending the removed words to each match.

    A one-word prefix gets a suffix lookup on the word itself (with nothing
    to prepend), so single-word inputs still reach the suffix index.
    """
    out = mpc(query_index, prefix, k)
    words, trailing = _split_prefix(prefix)
    tail_mark = " " if trailing else ""
    if not words:
        starts = []
    elif len(words) == 1:
        starts = [0]
    else:
        starts = range(1, len(words))
    for i in starts:
        tail = " ".join(words[i:]) + tail_mark
        removed = " ".join(words[:i])
        for r in suffix_index.top_k(tail, k):
            text = f"{removed} {r.text}" if removed else r.text
            out.append(Candidate(text, Source.SUFFIX, len(words) - i,
                                 r.frequency))
    return _dedup_truncate(out, k)


GENERATORS = {"mpc": mpc, "lwg": lwg, "mcg": mcg}


def generate(mode: str, query_index, suffix_index, prefix: str,
             k: int = DEFAULT_K):
    if mode == "mpc":
        return mpc(query_index, prefix, k)
    if mode == "lwg":
        return lwg(query_index, suffix_index, prefix, k)
    if mode == "mcg":
        return mcg(query_index, suffix_index, prefix, k)
    raise ValueError(f"unknown generation mode: {mode}")
