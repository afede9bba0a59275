"""Linear GNNs and their training dynamics (C++ core)."""

from ._lgnn import *  # noqa: F401,F403
from ._lgnn import __doc__  # noqa: F401
