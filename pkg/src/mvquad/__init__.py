"""Mean value decompositions and shared-weight quadrature rules.

For n real functions over a measured domain, find at most n points and
one set of nonnegative weights reproducing every normalized integral at
once (n+1 points when an integrand is discontinuous).
"""

from .caratheodory import ConvexCombination, prune
from .config import Config, load_config
from .domain import BoxMeasure, DiscreteMeasure, box, interval, path_eval, prob
from .errors import (
    ConfigError,
    EvalError,
    IntegrationError,
    MVQError,
    ParseError,
    StageError,
)
from .expr import evaluate, parse
from .integrate import MeanVector, mean_vector, riemann_atoms
from .path_reduce import reduce
from .pipeline import QuadratureRule, synthesize, verify

__version__ = "0.1.0"
