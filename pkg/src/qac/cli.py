"""Command-line entry points for the full pipeline: log preparation, index
builds, candidate generation, training, evaluation, benchmarks and serving."""

from __future__ import annotations

import random
import sys
from pathlib import Path

import click

from . import corpus, evaluation, generation, training
from .prefix_index import PrefixIndex
from .ranker import Vocabulary, load_params, save_params
from .service import ServiceConfig, load_config, serve


@click.group()
def main():
    """Two-stage query auto-completion toolkit."""


@main.command()
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["tsv", "aol"]),
              default="tsv", show_default=True)
@click.option("--boundaries", nargs=3, type=float, required=True,
              help="background/train, train/validation, validation/test "
                   "split timestamps (epoch seconds)")
@click.option("--suffix-limit", default=100000, show_default=True)
@click.option("--k", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out-dir", required=True, type=click.Path())
def prepare(log_path, fmt, boundaries, suffix_limit, k, seed, out_dir):
    """Normalize a query log and emit background.tsv, suffixes.tsv,
    pairs.tsv plus train/validation/test query lists."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = corpus.sessionize(corpus.read_log_file(log_path, fmt))
    split = corpus.split_by_time(records, tuple(boundaries))
    background = corpus.count_frequencies(split.background)
    suffixes = corpus.extract_top_suffixes(background, suffix_limit)
    corpus.write_frequency_file(out / "background.tsv", background)
    corpus.write_frequency_file(out / "suffixes.tsv", suffixes)

    query_index = PrefixIndex.build(background.items())
    suffix_index = PrefixIndex.build(suffixes.items()) if suffixes \
        else PrefixIndex.build([("\x00", 1)])

    def generator(prefix, cap):
        return generation.mcg(query_index, suffix_index, prefix, cap)

    for name, records_part in (("train", split.train),
                               ("validation", split.validation),
                               ("test", split.test)):
        queries = [" ".join(corpus.normalize_query(r.query_text))
                   for r in records_part]
        (out / f"{name}.txt").write_text(
            "".join(q + "\n" for q in queries if q), encoding="utf-8")

    train_queries = [q for q in
                     (out / "train.txt").read_text().splitlines() if q]
    pairs = corpus.make_training_pairs(train_queries, generator, k, seed)
    corpus.write_pairs_file(out / "pairs.tsv", pairs)
    click.echo(f"background={len(background)} suffixes={len(suffixes)} "
               f"pairs={len(pairs)}")


@main.command("build-index")
@click.option("--entries", "entries_path", required=True,
              type=click.Path(exists=True),
              help="TSV of text<TAB>frequency (background.tsv/suffixes.tsv)")
@click.option("--out", "out_path", required=True, type=click.Path())
def build_index(entries_path, out_path):
    """Build and serialize a prefix index from a frequency file."""
    counts = corpus.read_frequency_file(entries_path)
    index = PrefixIndex.build(counts.items())
    index.save(out_path)
    click.echo(f"wrote {len(index)} entries to {out_path}")


@main.command("generate")
@click.option("--mode", type=click.Choice(["mpc", "lwg", "mcg"]),
              required=True)
@click.option("--prefix", required=True)
@click.option("--k", default=10, show_default=True)
@click.option("--query-index", "query_index_path", required=True,
              type=click.Path(exists=True))
@click.option("--suffix-index", "suffix_index_path", required=True,
              type=click.Path(exists=True))
def generate_cmd(mode, prefix, k, query_index_path, suffix_index_path):
    """Print candidates, one per line: text, source, frequency."""
    query_index = PrefixIndex.load(query_index_path)
    suffix_index = PrefixIndex.load(suffix_index_path)
    normalized = corpus.normalize_prefix(prefix)
    for cand in generation.generate(mode, query_index, suffix_index,
                                    normalized, k):
        click.echo(f"{cand.text}\t{cand.source.value}\t{cand.frequency}")


@main.command("train")
@click.option("--pairs", "pairs_path", required=True,
              type=click.Path(exists=True))
@click.option("--val-pairs", "val_pairs_path", type=click.Path(exists=True))
@click.option("--vocab-size", default=30000, show_default=True)
@click.option("--dim", default=100, show_default=True)
@click.option("--layers", default=1, show_default=True)
@click.option("--epochs", default=10, show_default=True)
@click.option("--batch-size", default=64, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--scorer", type=click.Choice(["unnormalized", "lstm_emb"]),
              default="unnormalized", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def train_cmd(pairs_path, val_pairs_path, vocab_size, dim, layers, epochs,
              batch_size, seed, scorer, out_path):
    """Train a scorer on pairwise data; streams epoch, loss, val MRR."""
    pairs = corpus.read_pairs_file(pairs_path)
    val_pairs = corpus.read_pairs_file(val_pairs_path) \
        if val_pairs_path else None
    counts = {}
    for p in pairs:
        for text in [p.positive] + p.negatives:
            for tok in text.split():
                counts[tok] = counts.get(tok, 0) + 1
    vocab = Vocabulary.from_counts(counts, vocab_size)
    config = training.TrainConfig(epochs=epochs, batch_size=batch_size,
                                  seed=seed, scorer=scorer, dim=dim,
                                  num_layers=layers)
    params, metrics = training.train(pairs, vocab, config, val_pairs)
    for row in metrics:
        click.echo(f"{row['epoch']}\t{row['loss']:.6f}\t{row['val_mrr']:.4f}")
    save_params(params, out_path)


@main.command("eval")
@click.option("--model", "model_path", type=click.Path(exists=True))
@click.option("--mode", "rank_mode",
              type=click.Choice(["frequency", "neural", "hybrid"]),
              default="frequency", show_default=True)
@click.option("--scorer",
              type=click.Choice(["unnormalized", "normalized", "lstm_emb"]),
              default="unnormalized", show_default=True)
@click.option("--generator", "gen_mode",
              type=click.Choice(["mpc", "lwg", "mcg"]), default="mcg",
              show_default=True)
@click.option("--cases", "cases_path", required=True,
              type=click.Path(exists=True),
              help="queries (one per line) or prefix<TAB>target lines")
@click.option("--query-index", "query_index_path", required=True,
              type=click.Path(exists=True))
@click.option("--suffix-index", "suffix_index_path", required=True,
              type=click.Path(exists=True))
@click.option("--k", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
def eval_cmd(model_path, rank_mode, scorer, gen_mode, cases_path,
             query_index_path, suffix_index_path, k, seed):
    """Tab-separated report: metric, all, seen, unseen."""
    query_index = PrefixIndex.load(query_index_path)
    suffix_index = PrefixIndex.load(suffix_index_path)
    params = load_params(model_path) if model_path else None
    if rank_mode != "frequency" and params is None:
        raise click.UsageError("--model required for neural/hybrid ranking")

    cases = []
    rng = random.Random(seed)
    for line in Path(cases_path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        if "\t" in line:
            prefix, target = line.split("\t", 1)
            cases.append(evaluation.EvalCase(prefix=prefix, target=target))
        else:
            cases.extend(evaluation.make_eval_cases([line.strip()], rng))

    report = evaluation.evaluate(cases, query_index, suffix_index, gen_mode,
                                 rank_mode, params, scorer, k)
    click.echo("metric\tall\tseen\tunseen")
    r, m = report.recall_at_k, report.mrr_at_k
    click.echo(f"recall@{k}\t{r.all:.4f}\t{r.seen:.4f}\t{r.unseen:.4f}")
    click.echo(f"mrr@{k}\t{m.all:.4f}\t{m.seen:.4f}\t{m.unseen:.4f}")
    click.echo(f"cases\t{report.counts['all']}\t{report.counts['seen']}"
               f"\t{report.counts['unseen']}")


@main.command("bench")
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True))
@click.option("--scorer",
              type=click.Choice(["unnormalized", "normalized", "lstm_emb"]),
              default="unnormalized", show_default=True)
@click.option("--runs", default=1000, show_default=True)
def bench_cmd(model_path, scorer, runs):
    """Latency of ranking a fixed 10-candidate list."""
    from .generation import Candidate, Source

    params = load_params(model_path)
    rng = random.Random(0)
    vocab_tokens = params.vocab.id_to_token[3:] or ["w"]
    candidates = []
    for i in range(10):
        words = [rng.choice(vocab_tokens) for _ in range(rng.choice([3, 3, 4]))]
        candidates.append(Candidate(" ".join(words), Source.SUFFIX, 1, i + 1))
    report = evaluation.bench_ranking(params, candidates, scorer, runs=runs)
    click.echo(f"scorer={scorer}\tmean={report.mean_ms:.2f}ms"
               f"\tp50={report.p50_ms:.2f}ms\tp95={report.p95_ms:.2f}ms"
               f"\tp99={report.p99_ms:.2f}ms\truns={report.runs}")


@main.command("serve")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
def serve_cmd(config_path):
    """Run the completion HTTP service."""
    serve(load_config(config_path))


if __name__ == "__main__":
    main()
