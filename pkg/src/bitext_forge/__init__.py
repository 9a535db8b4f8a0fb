"""Parallel-corpus engineering toolkit: filtering, dedup, vocabularies, pivot routing, scoring."""

__version__ = "0.1.0"
