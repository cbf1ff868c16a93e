"""Duet expectiles on finite state spaces."""

from duetx.acts import Act, EventSet, indicator, ssd_dominates
from duetx.errors import DuetError
from duetx.expectile import DuetParams, GenParams, solve, solve_duet, solve_gen, solve_solo
from duetx.measures import FiniteSpace, Measure, ProbMeasure, normalize
from duetx.oracle import PreferenceOracle, duet_oracle, functional_oracle

__version__ = "0.1.0"

__all__ = [
    "Act",
    "DuetError",
    "DuetParams",
    "EventSet",
    "FiniteSpace",
    "GenParams",
    "Measure",
    "PreferenceOracle",
    "ProbMeasure",
    "duet_oracle",
    "functional_oracle",
    "indicator",
    "normalize",
    "solve",
    "solve_duet",
    "solve_gen",
    "solve_solo",
    "ssd_dominates",
]
