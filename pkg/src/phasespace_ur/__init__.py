"""Numerical preparation and measurement uncertainty on finite phase spaces."""

from .lca import GroupSpec, RangeError, bits, circle, cyclic, line, parse_group, product, zint
from .metrics import Distribution, MetricSpec, deviation, parse_metric, spread, transport_distance
from .groundstate import Scenario, SolverError, sweep_tradeoff

__version__ = "0.1.0"
