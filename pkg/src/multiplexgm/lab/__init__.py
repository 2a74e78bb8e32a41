"""Executable matchability checks: X_P, condition evaluators, enumeration
oracles and the Monte Carlo experiment harnesses."""

from .conditions import *  # noqa: F401,F403
from .experiments import *  # noqa: F401,F403
from .oracle import *  # noqa: F401,F403
from .xp import *  # noqa: F401,F403
