"""Delay-adaptive control loop simulator and bound checker."""

from ._dacsim import *  # noqa: F401,F403
from ._dacsim import __doc__  # noqa: F401
