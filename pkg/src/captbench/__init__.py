"""Benchmark harness and metrics for joint pronunciation assessment (APA)
and mispronunciation detection and diagnosis (MDD)."""

__version__ = "0.1.0"
