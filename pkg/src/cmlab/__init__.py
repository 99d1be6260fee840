"""Finite-alphabet laboratory for change-of-measure strong converse bounds."""

from .prob_core import (
    INF,
    Alphabet,
    Channel,
    EventSet,
    JointPmf,
    ckm_difference,
    entropy,
    kl_div,
    min_entropy,
    mutual_info,
    product_extend,
    tilt_on_event,
    time_shared_marginal,
    tv_distance,
)
from .objectives import AuxModel, ObjectiveParams, Problem, StructuredAux

__version__ = "0.1.0"

__all__ = [
    "INF", "Alphabet", "Channel", "EventSet", "JointPmf", "ckm_difference", "entropy",
    "kl_div", "min_entropy", "mutual_info", "product_extend", "tilt_on_event",
    "time_shared_marginal", "tv_distance", "AuxModel", "ObjectiveParams", "Problem",
    "StructuredAux",
]
