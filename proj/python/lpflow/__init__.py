"""Python interface to the lpflow simulation core."""

from ._lpflow import *  # noqa: F401,F403
from ._lpflow import __doc__  # noqa: F401
