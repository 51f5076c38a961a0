"""Benchmark harness for language-model task planners: constrained skill
decoding, symbolic household execution, goal checking, replanning, and
metrics, with pluggable token-scoring backends."""

from importlib import resources

__version__ = "0.1.0"


def data_path(name: str) -> str:
    """Filesystem path of a bundled data file."""
    return str(resources.files("planbench").joinpath("data", name))
