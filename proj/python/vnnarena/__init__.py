"""Python interface to the vnn-arena harness core.

Exposes property parsing, network loading and evaluation, the reference
verifier/falsifier, witness validation, and competition scoring. The timed
campaign runner is CLI-only (`vnn-arena run`).
"""

from vnnarena._core import *  # noqa: F401,F403
from vnnarena._core import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
