import random

import pytest

from conftest import build_indexes, random_corpus
from oracles import best_achievable_mrr, count_mrr, count_recall
from qac import evaluation, generation
from qac.evaluation import (EvalCase, bench_ranking, evaluate, mrr_at_k,
                            partition_seen, recall_at_k, sweep_bench)
from qac.prefix_index import PrefixIndex
from qac.ranker import Vocabulary, init_params


def cases_for(targets, seen=True):
    return [EvalCase(prefix=t[:1], target=t, seen=seen) for t in targets]


def test_recall_basics():
    cases = cases_for(["a"])
    assert recall_at_k(cases, [["a"]], 10).all == 1.0
    assert recall_at_k(cases, [["b"]], 10).all == 0.0
    cases = cases_for(["a", "b", "c", "d"])
    lists = [["a"], ["b"], ["c"], ["x"]]
    assert recall_at_k(cases, lists, 10).all == 0.75


def test_mrr_basics():
    cases = cases_for(["a"])
    assert mrr_at_k(cases, [["x", "y", "a"]], 10).all == pytest.approx(1 / 3)
    assert mrr_at_k(cases, [[f"x{i}" for i in range(10)] + ["a"]], 10).all == 0.0
    cases = cases_for(["a", "b"])
    assert mrr_at_k(cases, [["a"], ["x", "b"]], 10).all == 0.75


def test_partitioned_metrics_weighting():
    cases = [EvalCase("a", "a", seen=True), EvalCase("b", "b", seen=True),
             EvalCase("c", "c", seen=False)]
    lists = [["a"], ["x"], ["c"]]
    m = recall_at_k(cases, lists, 10)
    assert m.seen == 0.5
    assert m.unseen == 1.0
    # The all-partition number is the case-weighted mean.
    assert m.all == pytest.approx((2 * 0.5 + 1 * 1.0) / 3)


def test_partition_seen():
    qidx = PrefixIndex.build([("apple pie", 5)])
    cases = [EvalCase("app", "apple pie"), EvalCase("zzzz", "zzzz q")]
    tagged = partition_seen(cases, qidx)
    assert [c.seen for c in tagged] == [True, False]
    empty = PrefixIndex.build([])
    assert all(not c.seen for c in partition_seen(cases, empty))


def test_partition_seen_consistent_with_mpc(small_corpus, rng):
    background, _, qidx, _ = small_corpus
    from conftest import random_prefix
    for _ in range(50):
        prefix = random_prefix(rng, background)
        case = partition_seen([EvalCase(prefix, prefix)], qidx)[0]
        assert case.seen == bool(generation.mpc(qidx, prefix, 1))


def test_metrics_match_counting_oracle(rng):
    for _ in range(10):
        n = rng.randint(1, 200)
        targets = [f"q{i}" for i in range(n)]
        lists = []
        for t in targets:
            lst = [f"r{rng.randrange(30)}" for _ in range(rng.randint(0, 12))]
            if rng.random() < 0.6:
                lst.insert(rng.randrange(len(lst) + 1), t)
            lists.append(lst)
        cases = cases_for(targets)
        k = rng.choice([1, 5, 10])
        assert recall_at_k(cases, lists, k).all == count_recall(targets, lists, k)
        assert mrr_at_k(cases, lists, k).all == count_mrr(targets, lists, k)
        # Recall@k is the ceiling on MRR@k under any re-ranking.
        assert recall_at_k(cases, lists, k).all == \
            best_achievable_mrr(targets, [l[:k] for l in lists], k)
        assert mrr_at_k(cases, lists, k).all <= recall_at_k(cases, lists, k).all


def test_evaluate_end_to_end(small_corpus, rng):
    background, _, qidx, sidx = small_corpus
    cases = evaluation.make_eval_cases(list(background)[:40],
                                       random.Random(5))
    report = evaluate(cases, qidx, sidx, "mcg", k=10)
    assert 0.0 <= report.mrr_at_k.all <= report.recall_at_k.all <= 1.0
    assert report.counts["all"] == \
        report.counts["seen"] + report.counts["unseen"]


def bench_fixture(params, rng):
    from qac.generation import Candidate, Source
    tokens = params.vocab.id_to_token[3:]
    cands = []
    for i in range(10):
        n_words = rng.choice([3, 3, 3, 4])
        text = " ".join(rng.choice(tokens) for _ in range(n_words))
        cands.append(Candidate(text, Source.SUFFIX, 1, i + 1))
    return cands


def test_bench_ranking_report_shape(rng):
    vocab = Vocabulary([f"w{i}" for i in range(40)])
    params = init_params(vocab, dim=8, seed=0)
    cands = bench_fixture(params, rng)
    report = bench_ranking(params, cands, runs=30, warmup=5)
    assert report.runs == 30
    assert report.list_size == 10
    assert 3.0 <= report.mean_words <= 3.5
    assert report.p50_ms <= report.p95_ms <= report.p99_ms
    assert report.mean_ms > 0


def test_bench_single_run(rng):
    vocab = Vocabulary([f"w{i}" for i in range(10)])
    params = init_params(vocab, dim=4, seed=0)
    cands = bench_fixture(params, rng)
    report = bench_ranking(params, cands, runs=1, warmup=1)
    assert report.p50_ms == report.p95_ms == report.p99_ms


def test_bench_rejects_zero_runs(rng):
    vocab = Vocabulary([f"w{i}" for i in range(10)])
    params = init_params(vocab, dim=4, seed=0)
    with pytest.raises(ValueError):
        bench_ranking(params, bench_fixture(params, rng), runs=0)


def test_sweep_bench_rows(rng):
    vocab = Vocabulary([f"w{i}" for i in range(30)])
    cands = bench_fixture(init_params(vocab, dim=4, seed=0), rng)

    def make_model(dim, num_layers):
        return init_params(vocab, dim=dim, num_layers=num_layers, seed=1)

    rows = sweep_bench([4, 8], [1], make_model, cands, runs=10)
    assert len(rows) == 2
    assert {(r["dim"], r["layers"]) for r in rows} == {(4, 1), (8, 1)}


@pytest.mark.slow
def test_sweep_latency_grows_with_size(rng):
    vocab = Vocabulary([f"w{i}" for i in range(100)])
    cands = bench_fixture(init_params(vocab, dim=4, seed=0), rng)

    def make_model(dim, num_layers):
        return init_params(vocab, dim=dim, num_layers=num_layers, seed=1)

    rows = sweep_bench([32, 256], [1, 2], make_model, cands, runs=100)
    by_cfg = {(r["dim"], r["layers"]): r["mean_ms"] for r in rows}
    assert by_cfg[(256, 1)] > by_cfg[(32, 1)]
    assert by_cfg[(256, 2)] > by_cfg[(256, 1)]
