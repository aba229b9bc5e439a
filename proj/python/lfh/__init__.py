"""Learning from Hallucination local planner.

Thin bindings over the C++ library: the simulator, random-walk data generation,
hallucinated datasets, MLP training, the safety layer and the benchmark runner.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "0.1.0"
