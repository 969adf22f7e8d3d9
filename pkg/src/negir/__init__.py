"""negir: negation-aware BM25 retrieval with TREC-style evaluation."""

__version__ = "0.1.0"
