"""Python interface to the flagsim C++ core."""

from ._flagsim import *  # noqa: F401,F403
from ._flagsim import __doc__  # noqa: F401

__all__ = [name for name in dir() if not name.startswith("_")]
