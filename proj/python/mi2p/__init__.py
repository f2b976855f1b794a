"""Stochastic random search (sign-of-difference two-point) optimization."""

try:
    from ._mi2p import *  # noqa: F401,F403  (installed wheel layout)
except ImportError:  # pragma: no cover - in-tree builds put _mi2p on the path
    from _mi2p import *  # noqa: F401,F403

__version__ = "0.1.0"
