"""Acoustic data-driven subword modeling."""

from ._adsm import *  # noqa: F401,F403
from ._adsm import __version__  # noqa: F401
