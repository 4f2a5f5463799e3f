"""Worked example worlds shipped with the package."""

from importlib import resources
from pathlib import Path

NAMES = ("driving", "taxation")


def fixture_path(name: str) -> Path:
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {NAMES}")
    return Path(str(resources.files(__name__).joinpath(name, "world.json")))
