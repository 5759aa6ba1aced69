"""Certifiable quantum advantage for latency-constrained tacit coordination."""

__version__ = "0.1.0"
