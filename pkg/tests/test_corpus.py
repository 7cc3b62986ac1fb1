import random

import pytest

from qac import corpus
from qac.corpus import LogRecord, TrainingPair


def test_normalize_case_and_whitespace():
    assert corpus.normalize_query("Research Scientist") == ["research", "scientist"]
    assert corpus.normalize_query("  ") == []
    assert corpus.normalize_query("cheapest  flights ") == ["cheapest", "flights"]


def test_normalize_prefix_keeps_single_trailing_space():
    assert corpus.normalize_prefix("Cheapest  Flights ") == "cheapest flights "
    assert corpus.normalize_prefix("soft") == "soft"
    assert corpus.normalize_prefix("   ") == ""


def rec(text, ts=0, sid="s"):
    return LogRecord(sid, text, ts)


def test_dedupe_adjacent():
    out = corpus.dedupe_adjacent([rec("abc", 1), rec("abc", 2), rec("xyz", 3)])
    assert [r.query_text for r in out] == ["abc", "xyz"]
    assert corpus.dedupe_adjacent([rec("abc")])[0].query_text == "abc"
    out = corpus.dedupe_adjacent([rec("a", 1), rec("b", 2), rec("a", 3)])
    assert [r.query_text for r in out] == ["a", "b", "a"]


def test_dedupe_adjacent_idempotent(rng):
    records = [rec(rng.choice(["a", "b", "a a"]), i) for i in range(50)]
    once = corpus.dedupe_adjacent(records)
    assert corpus.dedupe_adjacent(once) == once


def test_dedupe_compares_normalized_text():
    out = corpus.dedupe_adjacent([rec("Abc "), rec("abc")])
    assert len(out) == 1


def test_split_by_time_half_open_windows():
    records = [rec("a", 5), rec("b", 10), rec("c", 20), rec("d", 31)]
    split = corpus.split_by_time(records, (10, 20, 30))
    assert [r.query_text for r in split.background] == ["a"]
    assert [r.query_text for r in split.train] == ["b"]
    assert [r.query_text for r in split.validation] == ["c"]
    assert [r.query_text for r in split.test] == ["d"]


def test_split_by_time_partition_totality(rng):
    records = [rec("q", rng.uniform(0, 40)) for _ in range(200)]
    split = corpus.split_by_time(records, (10, 20, 30))
    total = sum(len(p) for p in
                (split.background, split.train, split.validation, split.test))
    assert total == len(records)


def test_split_rejects_bad_boundaries():
    with pytest.raises(ValueError):
        corpus.split_by_time([], (20, 10, 30))


def test_count_frequencies_threshold():
    records = [rec("a b")] * 5 + [rec("c")] * 2 + [rec("d")] * 3
    counts = corpus.count_frequencies(records)
    assert counts == {"a b": 5, "d": 3}
    assert corpus.count_frequencies([]) == {}


def test_extract_top_suffixes_enumeration():
    assert corpus.extract_top_suffixes({"a b": 2}, 10) == {"a b": 2, "b": 2}
    assert corpus.extract_top_suffixes({"a b": 2, "c b": 3}, 1) == {"b": 5}
    assert corpus.extract_top_suffixes({}, 5) == {}


def test_suffix_closure_brute_force(rng):
    from conftest import random_corpus
    background, suffixes = random_corpus(rng, n_queries=40)
    for suffix, freq in suffixes.items():
        expected = 0
        found = False
        for text, qfreq in background.items():
            tokens = text.split()
            tails = {" ".join(tokens[i:]) for i in range(len(tokens))}
            if suffix in tails:
                found = True
                expected += qfreq
        assert found
        assert freq == expected


def test_make_training_pairs_membership():
    from qac.generation import Candidate, Source

    def generator(prefix, k):
        pool = ["a b", "a c"]
        return [Candidate(t, Source.QUERY, 0, 1) for t in pool
                if t.startswith(prefix)]

    pairs = corpus.make_training_pairs(["a b"], generator, seed=3)
    assert len(pairs) == 1
    assert pairs[0].positive == "a b"
    assert pairs[0].negatives == ["a c"]
    assert pairs[0].positive.startswith(pairs[0].prefix)

    # Target never generated -> no pair.
    assert corpus.make_training_pairs(["z z"], generator) == []


def test_make_training_pairs_counts(rng):
    from qac.generation import Candidate, Source

    queries = [" ".join(rng.choice("ab") for _ in range(2)) for _ in range(100)]

    def generator(prefix, k):
        pool = sorted({q for q in queries if q.startswith(prefix)})
        extra = [p + " x" for p in pool]
        cands = (pool + extra)[:k]
        return [Candidate(t, Source.QUERY, 0, 1) for t in cands]

    pairs = corpus.make_training_pairs(queries, generator, k=10, seed=0)
    assert len(pairs) <= 100
    assert all(len(p.negatives) <= 9 for p in pairs)


def test_pairs_file_round_trip(tmp_path):
    pairs = [TrainingPair("a", "a b", ["a c", "a d"]),
             TrainingPair("x", "x y", [])]
    path = tmp_path / "pairs.tsv"
    corpus.write_pairs_file(path, pairs)
    assert corpus.read_pairs_file(path) == pairs


def test_frequency_file_round_trip(tmp_path):
    counts = {"a b": 5, "c": 3}
    path = tmp_path / "background.tsv"
    corpus.write_frequency_file(path, counts)
    assert corpus.read_frequency_file(path) == counts


def test_read_log_file_formats(tmp_path):
    tsv = tmp_path / "log.tsv"
    tsv.write_text("s1\thello world\t100\n"
                   "s1\t   \t101\n"
                   "s2\tfoo\t2006-03-01T00:00:00+00:00\n")
    records = corpus.read_log_file(tsv)
    assert len(records) == 2  # empty query dropped
    assert records[0].timestamp == 100.0
    assert records[1].timestamp == 1141171200.0

    aol = tmp_path / "aol.txt"
    aol.write_text("AnonID\tQuery\tQueryTime\tItemRank\tClickURL\n"
                   "42\tjobs seattle\t2006-03-02T10:00:00\t1\turl\n")
    records = corpus.read_log_file(aol, fmt="aol")
    assert len(records) == 1
    assert records[0].session_id == "42"


def test_sessionize_orders_and_dedupes():
    records = [rec("b", 2, "s1"), rec("a", 1, "s1"), rec("a", 3, "s1"),
               rec("a", 1, "s2")]
    out = corpus.sessionize(records)
    s1 = [r.query_text for r in out if r.session_id == "s1"]
    assert s1 == ["a", "b", "a"]
    assert len([r for r in out if r.session_id == "s2"]) == 1
