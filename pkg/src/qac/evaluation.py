"""Recall@k / MRR@k with seen/unseen partitioning, plus wall-clock latency
benchmarks for the ranking stage."""

from __future__ import annotations

import random
import statistics
import time
from dataclasses import dataclass, field, replace

from . import corpus, generation
from .ranker import SCORERS, rank_candidates


@dataclass
class EvalCase:
    prefix: str
    target: str
    seen: bool = False


@dataclass
class PartitionedMetric:
    all: float
    seen: float
    unseen: float


@dataclass
class EvalReport:
    recall_at_k: PartitionedMetric
    mrr_at_k: PartitionedMetric
    counts: dict  # partition -> case count
    k: int


@dataclass
class LatencyReport:
    mean_ms: float
    p50_ms: float
    p95_ms: float
    p99_ms: float
    runs: int
    list_size: int
    mean_words: float


def _partition_mean(values_by_partition):
    def mean(vals):
        return sum(vals) / len(vals) if vals else 0.0
    seen, unseen = values_by_partition
    return PartitionedMetric(all=mean(seen + unseen), seen=mean(seen),
                             unseen=mean(unseen))


def _split_values(cases, values):
    seen = [v for case, v in zip(cases, values) if case.seen]
    unseen = [v for case, v in zip(cases, values) if not case.seen]
    return seen, unseen


def recall_at_k(cases, ranked_lists, k: int) -> PartitionedMetric:
    """Fraction of cases whose target appears in the top k."""
    values = [1.0 if case.target in texts[:k] else 0.0
              for case, texts in zip(cases, ranked_lists)]
    return _partition_mean(_split_values(cases, values))


def mrr_at_k(cases, ranked_lists, k: int) -> PartitionedMetric:
    """Mean reciprocal rank of the target within the top k (0 if absent)."""
    values = []
    for case, texts in zip(cases, ranked_lists):
        head = texts[:k]
        values.append(1.0 / (head.index(case.target) + 1)
                      if case.target in head else 0.0)
    return _partition_mean(_split_values(cases, values))


def partition_seen(cases, query_index) -> list:
    """Tag each case: seen iff the query index has any match for the prefix."""
    return [replace(case, seen=bool(query_index.top_k(case.prefix, 1)))
            for case in cases]


def make_eval_cases(queries, rng: random.Random) -> list:
    """Sample one prefix per query with the training-pair sampling scheme."""
    cases = []
    for text in queries:
        tokens = text.split()
        if not tokens:
            continue
        cases.append(EvalCase(prefix=corpus.sample_prefix(tokens, rng),
                              target=" ".join(tokens)))
    return cases


def evaluate(cases, query_index, suffix_index, gen_mode: str,
             rank_mode: str = "frequency", params=None,
             scorer: str = "unnormalized", k: int = 10) -> EvalReport:
    """Run generation + ranking over tagged cases and compute both metrics."""
    cases = partition_seen(cases, query_index)
    ranked_lists = []
    for case in cases:
        cands = generation.generate(gen_mode, query_index, suffix_index,
                                    case.prefix, k)
        if rank_mode != "frequency":
            cands = rank_candidates(cands, params, rank_mode, scorer)
        ranked_lists.append([c.text for c in cands])
    counts = {
        "all": len(cases),
        "seen": sum(1 for c in cases if c.seen),
        "unseen": sum(1 for c in cases if not c.seen),
    }
    return EvalReport(recall_at_k=recall_at_k(cases, ranked_lists, k),
                      mrr_at_k=mrr_at_k(cases, ranked_lists, k),
                      counts=counts, k=k)


# --- latency -----------------------------------------------------------

def _percentile(sorted_vals, q: float) -> float:
    if not sorted_vals:
        return 0.0
    idx = min(len(sorted_vals) - 1, int(round(q * (len(sorted_vals) - 1))))
    return sorted_vals[idx]


def bench_ranking(params, candidates, scorer: str = "unnormalized",
                  rank_mode: str = "neural", runs: int = 1000,
                  warmup: int = 50) -> LatencyReport:
    """Per-call wall-clock latency of scoring + sorting one candidate list,
    measured single-threaded after warmup. Generation is excluded."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    for _ in range(warmup):
        rank_candidates(candidates, params, rank_mode, scorer)
    samples = []
    for _ in range(runs):
        t0 = time.perf_counter()
        rank_candidates(candidates, params, rank_mode, scorer)
        samples.append((time.perf_counter() - t0) * 1000.0)
    ordered = sorted(samples)
    words = [len(c.text.split()) for c in candidates]
    return LatencyReport(
        mean_ms=statistics.fmean(samples),
        p50_ms=_percentile(ordered, 0.50),
        p95_ms=_percentile(ordered, 0.95),
        p99_ms=_percentile(ordered, 0.99),
        runs=runs,
        list_size=len(candidates),
        mean_words=statistics.fmean(words) if words else 0.0,
    )


def sweep_bench(dims, layers, make_model, candidates, eval_fn=None,
                runs: int = 200) -> list:
    """Latency (and optionally MRR) per (dim, layer-count) configuration.
    `make_model(dim, num_layers)` supplies the params for each cell."""
    rows = []
    for num_layers in layers:
        for dim in dims:
            params = make_model(dim, num_layers)
            report = bench_ranking(params, candidates, runs=runs)
            row = {"dim": dim, "layers": num_layers,
                   "mean_ms": report.mean_ms}
            if eval_fn is not None:
                row["mrr"] = eval_fn(params)
            rows.append(row)
    return rows
