"""Zeroth-order black-box adversarial attack toolkit."""

from zooattack._core import *  # noqa: F401,F403
from zooattack._core import __version__  # noqa: F401
