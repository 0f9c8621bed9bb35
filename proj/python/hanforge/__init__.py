"""Hierarchical attention networks for unreliable-news classification."""

try:
    from ._core import *  # noqa: F401,F403
    from ._core import __version__  # noqa: F401
except ImportError:  # in-tree builds put _core on PYTHONPATH instead
    from _core import *  # noqa: F401,F403
    from _core import __version__  # noqa: F401
