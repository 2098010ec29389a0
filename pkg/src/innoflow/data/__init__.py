"""Bundled 5-node fixture dataset used by tests and CLI smoke runs."""

from pathlib import Path

_HERE = Path(__file__).parent


def fixture_path(name: str) -> Path:
    """Path of a bundled data file, e.g. ``fixture_path("fixture_edges.csv")``."""
    path = _HERE / name
    if not path.exists():
        raise FileNotFoundError(f"no bundled file {name!r}")
    return path
