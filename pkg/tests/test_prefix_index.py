import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import scan_top_k
from qac.prefix_index import PrefixIndex, LookupResult


def as_tuples(results):
    return [(r.text, r.frequency) for r in results]


def test_build_merges_duplicates():
    idx = PrefixIndex.build([("ab", 3), ("ab", 2)])
    assert as_tuples(idx.top_k("ab", 10)) == [("ab", 5)]


def test_empty_index():
    idx = PrefixIndex.build([])
    assert idx.top_k("anything", 5) == []
    assert idx.top_k("", 5) == []


def test_rejects_empty_text():
    with pytest.raises(ValueError):
        PrefixIndex.build([("", 1)])


def test_hand_sorted_example():
    idx = PrefixIndex.build([("app", 5), ("apple", 3), ("apply", 3)])
    assert as_tuples(idx.top_k("app", 2)) == [("app", 5), ("apple", 3)]
    assert idx.top_k("zzz", 10) == []
    assert as_tuples(idx.top_k("apple", 10)) == [("apple", 3)]


def test_empty_prefix_returns_global_top(rng):
    entries = [(f"q{i}{rng.choice('abc')}", rng.randint(1, 1000))
               for i in range(10000)]
    idx = PrefixIndex.build(entries)
    assert as_tuples(idx.top_k("", 10)) == scan_top_k(idx.entries(), "", 10)


entry_lists = st.lists(
    st.tuples(st.text(alphabet="abc ", min_size=1, max_size=8),
              st.integers(min_value=1, max_value=50)),
    max_size=60)


@settings(max_examples=200, deadline=None)
@given(entries=entry_lists, prefix=st.text(alphabet="abc ", max_size=6),
       k=st.integers(min_value=1, max_value=15))
def test_oracle_equivalence(entries, prefix, k):
    entries = [(t, f) for t, f in entries if t.strip() or t]
    idx = PrefixIndex.build(entries, scan_cutoff=4)
    assert as_tuples(idx.top_k(prefix, k)) == \
        scan_top_k(idx.entries(), prefix, k)


def test_oracle_equivalence_large_random(rng):
    entries = [(" ".join(rng.choice("abcd") for _ in range(rng.randint(1, 4))),
                rng.randint(1, 99)) for _ in range(1000)]
    idx = PrefixIndex.build(entries, scan_cutoff=8)
    merged = idx.entries()
    for _ in range(300):
        prefix = rng.choice([t[:rng.randint(0, len(t))] for t, _ in entries])
        k = rng.randint(1, 12)
        assert as_tuples(idx.top_k(prefix, k)) == scan_top_k(merged, prefix, k)


def test_prefix_monotonicity(small_corpus):
    background, _, qidx, _ = small_corpus
    for text in list(background)[:30]:
        base = {r.text for r in qidx.top_k(text[:1], 50)}
        extended = qidx.top_k(text[:2], 50)
        assert all(r.text in base for r in extended)


def test_determinism_under_shuffle(rng):
    entries = [(f"w{i % 7} q{i}", (i * 13) % 40 + 1) for i in range(200)]
    shuffled = entries[:]
    rng.shuffle(shuffled)
    a = PrefixIndex.build(entries)
    b = PrefixIndex.build(shuffled)
    for prefix in ["", "w", "w3", "w3 q", "zz"]:
        assert as_tuples(a.top_k(prefix, 10)) == as_tuples(b.top_k(prefix, 10))


def test_k_larger_than_cache(rng):
    entries = [(f"a{i:03d}", rng.randint(1, 30)) for i in range(300)]
    idx = PrefixIndex.build(entries, cache_k=10, scan_cutoff=8)
    assert as_tuples(idx.top_k("a", 40)) == scan_top_k(entries, "a", 40)


def test_serialization_round_trip(tmp_path, rng):
    entries = [(" ".join(rng.choice("abc") for _ in range(rng.randint(1, 3))),
                rng.randint(1, 9)) for _ in range(150)]
    entries.append(("unicode café", 7))
    idx = PrefixIndex.build(entries)
    path = tmp_path / "index.bin"
    idx.save(path)
    loaded = PrefixIndex.load(path)
    assert loaded.entries() == idx.entries()
    for prefix in ["", "a", "ab c", "unicode", "caf"]:
        assert as_tuples(loaded.top_k(prefix, 10)) == \
            as_tuples(idx.top_k(prefix, 10))
    assert path.read_bytes()[:8] == b"QACIDX1\x00"


def test_load_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOTANIDX" + b"\x00" * 16)
    with pytest.raises(ValueError):
        PrefixIndex.load(path)


@pytest.mark.slow
def test_large_index_lookup_latency(rng):
    import time
    entries = [(" ".join(rng.choice("abcdefgh") + str(rng.randint(0, 999))
                         for _ in range(rng.randint(1, 4))),
                rng.randint(1, 10000)) for _ in range(1_000_000)]
    idx = PrefixIndex.build(entries)
    prefixes = [entries[rng.randrange(len(entries))][0][:rng.randint(1, 6)]
                for _ in range(200)]
    t0 = time.perf_counter()
    for p in prefixes:
        idx.top_k(p, 10)
    per_call_ms = (time.perf_counter() - t0) * 1000 / len(prefixes)
    assert per_call_ms < 1.0
