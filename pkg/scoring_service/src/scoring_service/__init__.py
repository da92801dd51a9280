"""Scoring service: masked-context scores from probability-weighted average
embeddings, sequence log-likelihood, and MoverScore-style similarity,
served over a line-delimited JSON protocol."""

__version__ = "0.1.0"
