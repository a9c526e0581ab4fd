"""Accessors for the small CSV panels shipped with the package."""

from importlib import resources
from pathlib import Path


def example_panel_path() -> Path:
    """Path of the packaged 150 x 4 synthetic example panel.

    Four series sharing one smooth trend at different strengths plus
    cross-correlated noise; useful for trying the CLI.
    """
    return Path(resources.files("mafkit").joinpath("data/example_panel.csv"))
