"""Neural candidate scoring: an unnormalized LSTM language model (scalar
normalizer b in place of the per-step softmax denominator), the exact
normalized scorer, and the final-hidden-state embedding baseline.

All math runs in 64-bit floats; scoring is stateless over immutable params.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"QACLM1\x00"

SOS = "<sos>"
EOS = "<eos>"
UNK = "<unk>"

# Gate order in the stacked weight blocks: input, forget, output, candidate.
GATES = ("i", "f", "o", "g")


class Vocabulary:
    """Token <-> id bijection. Specials occupy the first three ids and count
    toward the size budget."""

    def __init__(self, tokens):
        if tokens[:3] != [SOS, EOS, UNK]:
            tokens = [SOS, EOS, UNK] + [t for t in tokens
                                        if t not in (SOS, EOS, UNK)]
        self.id_to_token = list(tokens)
        self.token_to_id = {t: i for i, t in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValueError("duplicate tokens in vocabulary")
        self.sos = self.token_to_id[SOS]
        self.eos = self.token_to_id[EOS]
        self.unk = self.token_to_id[UNK]

    def __len__(self):
        return len(self.id_to_token)

    @classmethod
    def from_counts(cls, counts: dict, max_size: int = 30000):
        """Most frequent tokens, ties lexicographic; specials included in
        the budget."""
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        keep = [t for t, _ in ranked if t not in (SOS, EOS, UNK)]
        return cls([SOS, EOS, UNK] + keep[: max_size - 3])

    def encode(self, tokens) -> list:
        if isinstance(tokens, str):
            tokens = tokens.split()
        return [self.token_to_id.get(t, self.unk) for t in tokens]


@dataclass
class LstmLayer:
    wx: np.ndarray    # (d, 4d) input weights, gate blocks i|f|o|g
    wh: np.ndarray    # (d, 4d) recurrent weights
    bias: np.ndarray  # (4d,)


@dataclass
class ModelParams:
    vocab: Vocabulary
    emb: np.ndarray           # (N, d) token embeddings
    layers: list              # [LstmLayer], input size d, hidden size d
    b: float                  # scalar softmax-denominator stand-in
    w_emb: np.ndarray         # (d,) scoring vector for the embedding baseline

    @property
    def dim(self) -> int:
        return self.emb.shape[1]

    @property
    def vocab_size(self) -> int:
        return self.emb.shape[0]

    def copy(self):
        return ModelParams(
            vocab=self.vocab,
            emb=self.emb.copy(),
            layers=[LstmLayer(l.wx.copy(), l.wh.copy(), l.bias.copy())
                    for l in self.layers],
            b=float(self.b),
            w_emb=self.w_emb.copy(),
        )

    def validate(self):
        d = self.dim
        for l in self.layers:
            if l.wx.shape != (d, 4 * d) or l.wh.shape != (d, 4 * d) \
                    or l.bias.shape != (4 * d,):
                raise ValueError("LSTM weight shapes do not match dim")
        if self.w_emb.shape != (d,):
            raise ValueError("w_emb shape does not match dim")
        arrays = [self.emb, self.w_emb] + \
            [a for l in self.layers for a in (l.wx, l.wh, l.bias)]
        if not all(np.isfinite(a).all() for a in arrays) \
                or not np.isfinite(self.b):
            raise ValueError("non-finite model parameters")


def xavier_init(shape, rng) -> np.ndarray:
    """Uniform(-r, r) with r = sqrt(6 / (fan_in + fan_out))."""
    fan_in, fan_out = shape[0], shape[-1]
    r = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-r, r, size=shape)


def init_params(vocab: Vocabulary, dim: int = 100, num_layers: int = 1,
                seed: int = 0) -> ModelParams:
    """Xavier-initialized model. b starts at log(N) so untrained
    unnormalized scores approximate a uniform language model."""
    rng = np.random.default_rng(seed)
    n = len(vocab)
    layers = []
    for _ in range(num_layers):
        layers.append(LstmLayer(
            wx=xavier_init((dim, 4 * dim), rng),
            wh=xavier_init((dim, 4 * dim), rng),
            bias=np.zeros(4 * dim),
        ))
    return ModelParams(
        vocab=vocab,
        emb=xavier_init((n, dim), rng),
        layers=layers,
        b=float(np.log(n)),
        w_emb=xavier_init((dim, 1), rng)[:, 0],
    )


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def lstm_step(x, h, c, layer: LstmLayer):
    """One LSTM cell update; returns (h', c')."""
    d = h.shape[0]
    z = x @ layer.wx + h @ layer.wh + layer.bias
    i = _sigmoid(z[:d])
    f = _sigmoid(z[d:2 * d])
    o = _sigmoid(z[2 * d:3 * d])
    g = np.tanh(z[3 * d:])
    c_new = f * c + i * g
    h_new = o * np.tanh(c_new)
    return h_new, c_new


def _prepare_ids(tokens, vocab: Vocabulary):
    ids = vocab.encode(tokens) if not _is_id_list(tokens) else list(tokens)
    return [vocab.sos] + ids + [vocab.eos]


def _is_id_list(tokens):
    return isinstance(tokens, (list, tuple)) and tokens and \
        all(isinstance(t, (int, np.integer)) for t in tokens)


def run_states(ids, params: ModelParams):
    """Feed the full id sequence (sos..eos); returns top-layer hidden states
    H where H[t] is the state after consuming ids[t]. H[-1] in each layer
    starts at zero."""
    d = params.dim
    nl = len(params.layers)
    h = [np.zeros(d) for _ in range(nl)]
    c = [np.zeros(d) for _ in range(nl)]
    top = []
    for tok in ids:
        x = params.emb[tok]
        for li, layer in enumerate(params.layers):
            h[li], c[li] = lstm_step(x, h[li], c[li], layer)
            x = h[li]
        top.append(h[-1])
    return top


def score_unnormalized(tokens, params: ModelParams) -> float:
    """Sum over scored positions (all tokens after <sos>, <eos> included)
    of v_target . h_prev - b."""
    ids = _prepare_ids(tokens, params.vocab)
    top = run_states(ids[:-1], params)  # states up to the last real token
    total = 0.0
    for t in range(1, len(ids)):
        total += float(params.emb[ids[t]] @ top[t - 1]) - params.b
    return total


def score_normalized(tokens, params: ModelParams) -> float:
    """Exact log-probability with a per-step logsumexp over the vocabulary
    (max-subtracted for stability)."""
    ids = _prepare_ids(tokens, params.vocab)
    top = run_states(ids[:-1], params)
    total = 0.0
    for t in range(1, len(ids)):
        h_prev = top[t - 1]
        logits = params.emb @ h_prev
        m = logits.max()
        lse = m + np.log(np.exp(logits - m).sum())
        total += float(logits[ids[t]] - lse)
    return total


def score_lstm_emb(tokens, params: ModelParams) -> float:
    """Dot product of the final hidden state (after <eos>) with the learned
    scoring vector."""
    ids = _prepare_ids(tokens, params.vocab)
    top = run_states(ids, params)
    return float(top[-1] @ params.w_emb)


SCORERS = {
    "unnormalized": score_unnormalized,
    "normalized": score_normalized,
    "lstm_emb": score_lstm_emb,
}


def rank_candidates(candidates, params: ModelParams, mode: str = "hybrid",
                    scorer: str = "unnormalized"):
    """Order a generation-ordered candidate list.

    frequency: input order unchanged. neural: everything sorted by score
    desc (ties keep original position). hybrid: query-index candidates keep
    their positions ahead of suffix-index candidates, which are score-sorted.
    """
    from .generation import Candidate, Source

    if mode == "frequency":
        return list(candidates)
    score_fn = SCORERS[scorer]

    def scored(cand):
        s = score_fn(cand.text.split(), params)
        return Candidate(cand.text, cand.source, cand.context_words_matched,
                         cand.frequency, s)

    if mode == "neural":
        out = [scored(c) for c in candidates]
        order = sorted(range(len(out)),
                       key=lambda i: (-out[i].neural_score, i))
        return [out[i] for i in order]
    if mode == "hybrid":
        query = [c for c in candidates if c.source == Source.QUERY]
        suffix = [scored(c) for c in candidates if c.source == Source.SUFFIX]
        order = sorted(range(len(suffix)),
                       key=lambda i: (-suffix[i].neural_score, i))
        return query + [suffix[i] for i in order]
    raise ValueError(f"unknown ranking mode: {mode}")


# --- model file -------------------------------------------------------------

def save_params(params: ModelParams, path) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        n, d = params.emb.shape
        fh.write(struct.pack("<QQQ", n, d, len(params.layers)))
        for tok in params.vocab.id_to_token:
            raw = tok.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
        def write_arr(a):
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())
        write_arr(params.emb)
        for layer in params.layers:
            for gi in range(4):
                write_arr(layer.wx[:, gi * d:(gi + 1) * d])
                write_arr(layer.wh[:, gi * d:(gi + 1) * d])
                write_arr(layer.bias[gi * d:(gi + 1) * d])
        fh.write(struct.pack("<d", params.b))
        write_arr(params.w_emb)


def load_params(path) -> ModelParams:
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise ValueError(f"not a model file: {path}")
        n, d, nl = struct.unpack("<QQQ", fh.read(24))
        tokens = []
        for _ in range(n):
            (tlen,) = struct.unpack("<I", fh.read(4))
            tokens.append(fh.read(tlen).decode("utf-8"))
        vocab = Vocabulary(tokens)

        def read_arr(shape):
            count = int(np.prod(shape))
            a = np.frombuffer(fh.read(count * 8), dtype="<f8").astype(np.float64)
            return a.reshape(shape)

        emb = read_arr((n, d))
        layers = []
        for _ in range(nl):
            wx = np.zeros((d, 4 * d))
            wh = np.zeros((d, 4 * d))
            bias = np.zeros(4 * d)
            for gi in range(4):
                wx[:, gi * d:(gi + 1) * d] = read_arr((d, d))
                wh[:, gi * d:(gi + 1) * d] = read_arr((d, d))
                bias[gi * d:(gi + 1) * d] = read_arr((d,))
            layers.append(LstmLayer(wx, wh, bias))
        (b,) = struct.unpack("<d", fh.read(8))
        w_emb = read_arr((d,))
    params = ModelParams(vocab, emb, layers, b, w_emb)
    params.validate()
    return params
