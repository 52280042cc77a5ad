import os

from gpcollapse.radial import default_profile


HERE = os.path.dirname(__file__)


def ini(name):
    return os.path.join(HERE, name)


def profile():
    """The shared default profile (solved once per process)."""
    return default_profile()
