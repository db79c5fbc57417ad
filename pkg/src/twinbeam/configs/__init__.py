"""Bundled run configurations."""

from importlib import resources


def path(name):
    """Filesystem path of a bundled configuration file."""
    return resources.files(__name__).joinpath(name)


def names():
    return sorted(p.name for p in resources.files(__name__).iterdir() if p.name.endswith(".ini"))
