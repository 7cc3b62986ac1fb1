import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qac import corpus
from qac.prefix_index import PrefixIndex

LETTERS = "abcdef"


def random_word(rng, max_len=5):
    return "".join(rng.choice(LETTERS) for _ in range(rng.randint(1, max_len)))


def random_corpus(rng, n_queries=60, n_words=25, max_query_words=4,
                  suffix_limit=400):
    """A small synthetic background: query->frequency dict plus the derived
    suffix table."""
    words = list({random_word(rng) for _ in range(n_words)})
    background = {}
    for _ in range(n_queries):
        length = rng.randint(1, max_query_words)
        text = " ".join(rng.choice(words) for _ in range(length))
        background[text] = background.get(text, 0) + rng.randint(1, 9)
    suffixes = corpus.extract_top_suffixes(background, suffix_limit)
    return background, suffixes


def random_prefix(rng, background):
    """Prefixes of background queries (cut at a word boundary then inside
    the last word), occasionally mutated or garbage to exercise the unseen
    path, occasionally with a trailing space."""
    roll = rng.random()
    if roll < 0.15:
        return random_word(rng) + " " + random_word(rng)
    text = rng.choice(list(background))
    tokens = text.split()
    prefix = corpus.sample_prefix(tokens, rng)
    if roll < 0.35:
        # Prepend a word the query index has likely never seen.
        prefix = random_word(rng, 3) + "x " + prefix
    if rng.random() < 0.15:
        prefix += " "
    return prefix


def build_indexes(background, suffixes):
    qidx = PrefixIndex.build(background.items())
    sidx = PrefixIndex.build(suffixes.items())
    return qidx, sidx


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def small_corpus(rng):
    background, suffixes = random_corpus(rng)
    qidx, sidx = build_indexes(background, suffixes)
    return background, suffixes, qidx, sidx
