"""Immutable frequency-ordered prefix lookup (the query-index and
suffix-index roles share this structure).

Entries are kept lexicographically sorted; a character trie is expanded only
over prefix ranges larger than `scan_cutoff`, with a precomputed top-`cache_k`
list per node. Lookups for k <= cache_k therefore never touch more than
`scan_cutoff` raw entries, independent of subtree size.
"""

from __future__ import annotations

import heapq
import struct
from bisect import bisect_left

MAGIC = b"QACIDX1\x00"


class LookupResult:
    __slots__ = ("text", "frequency")

    def __init__(self, text: str, frequency: int):
        self.text = text
        self.frequency = frequency

    def __eq__(self, other):
        return (self.text, self.frequency) == (other.text, other.frequency)

    def __repr__(self):
        return f"LookupResult({self.text!r}, {self.frequency})"


class _Node:
    __slots__ = ("lo", "hi", "top", "children")

    def __init__(self, lo, hi):
        self.lo = lo
        self.hi = hi
        self.top = None       # list of entry indexes, ranking order
        self.children = None  # dict char -> _Node, only on expanded nodes


def _rank_key(texts, freqs):
    def key(i):
        return (-freqs[i], texts[i])
    return key


class PrefixIndex:
    """Built once from (text, frequency) entries, then read-only."""

    def __init__(self, texts, freqs, cache_k, scan_cutoff):
        self.texts = texts      # lexicographically sorted
        self.freqs = freqs
        self.cache_k = cache_k
        self.scan_cutoff = scan_cutoff
        self.root = self._build_node(0, len(texts), 0)

    # --- construction -----------------------------------------------------

    @classmethod
    def build(cls, entries, cache_k: int = 10, scan_cutoff: int = 64):
        merged = {}
        for text, freq in entries:
            if not text:
                raise ValueError("entry texts must be non-empty")
            merged[text] = merged.get(text, 0) + int(freq)
        texts = sorted(merged)
        freqs = [merged[t] for t in texts]
        return cls(texts, freqs, cache_k, scan_cutoff)

    def _build_node(self, lo, hi, depth):
        node = _Node(lo, hi)
        key = _rank_key(self.texts, self.freqs)
        if hi - lo <= self.scan_cutoff:
            node.top = sorted(range(lo, hi), key=key)[: self.cache_k]
            return node
        node.children = {}
        # Entries whose text ends exactly at this depth sort first.
        i = lo
        while i < hi and len(self.texts[i]) == depth:
            i += 1
        terminal_end = i
        while i < hi:
            ch = self.texts[i][depth]
            j = i
            while j < hi and self.texts[j][depth] == ch:
                j += 1
            node.children[ch] = self._build_node(i, j, depth + 1)
            i = j
        pool = list(range(lo, terminal_end))
        for child in node.children.values():
            pool.extend(child.top)
        node.top = sorted(pool, key=key)[: self.cache_k]
        return node

    # --- queries ------------------------------------------------------------

    def __len__(self):
        return len(self.texts)

    def top_k(self, prefix: str, k: int):
        """At most k completions of `prefix`, ordered by frequency desc then
        text asc. Unseen prefixes yield an empty list."""
        if k < 1:
            raise ValueError("k must be >= 1")
        node = self.root
        depth = 0
        for ch in prefix:
            if node.children is None:
                break
            child = node.children.get(ch)
            if child is None:
                return []
            node = child
            depth += 1
        key = _rank_key(self.texts, self.freqs)
        if depth == len(prefix) and k <= self.cache_k:
            idxs = node.top
        elif depth == len(prefix):
            idxs = heapq.nsmallest(k, range(node.lo, node.hi), key=key)
        else:
            # Walk stopped inside an unexpanded node: its range is small,
            # filter it linearly.
            matching = [i for i in range(node.lo, node.hi)
                        if self.texts[i].startswith(prefix)]
            idxs = sorted(matching, key=key)
        return [LookupResult(self.texts[i], self.freqs[i]) for i in idxs[:k]]

    def entries(self):
        return list(zip(self.texts, self.freqs))

    # --- serialization --------------------------------------------------------

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<Q", len(self.texts)))
            for text, freq in zip(self.texts, self.freqs):
                raw = text.encode("utf-8")
                fh.write(struct.pack("<I", len(raw)))
                fh.write(raw)
                fh.write(struct.pack("<Q", freq))

    @classmethod
    def load(cls, path, cache_k: int = 10, scan_cutoff: int = 64):
        with open(path, "rb") as fh:
            magic = fh.read(len(MAGIC))
            if magic != MAGIC:
                raise ValueError(f"not a prefix index file: {path}")
            (count,) = struct.unpack("<Q", fh.read(8))
            entries = []
            for _ in range(count):
                (tlen,) = struct.unpack("<I", fh.read(4))
                text = fh.read(tlen).decode("utf-8")
                (freq,) = struct.unpack("<Q", fh.read(8))
                entries.append((text, freq))
        return cls.build(entries, cache_k=cache_k, scan_cutoff=scan_cutoff)
