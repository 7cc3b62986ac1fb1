"""Two-stage query auto-completion: candidate generation over frequency-ordered
prefix indexes, plus an unnormalized LSTM language-model ranker."""

__version__ = "0.1.0"
