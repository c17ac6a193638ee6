"""Exact invariants, evaluation and minimality tools for plane valuations."""

__version__ = "0.1.0"
