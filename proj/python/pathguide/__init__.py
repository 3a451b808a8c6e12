"""Path-guided trajectory replanning."""

from ._pathguide import *  # noqa: F401,F403
from ._pathguide import __doc__  # noqa: F401

__version__ = "0.1.0"
