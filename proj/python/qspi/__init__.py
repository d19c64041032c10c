"""Twin-beam quantum single-pixel imaging simulator (Python bindings)."""

from ._qspi import *  # noqa: F401,F403
from ._qspi import QspiError, __doc__  # noqa: F401
