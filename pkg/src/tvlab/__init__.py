"""Distribution-family learning: exact distances, covers, learners and Monte Carlo checks."""

from .core import (
    DimensionError,
    Distribution,
    Hypothesis,
    HypothesisClass,
    InfeasibleError,
    LabeledSample,
    UnlabeledSample,
    distance_matrix,
    empirical_distance,
    exact_distance,
    tv_class_conditional,
)
from .classes import BenedekItaiInstance, CategoricalInstance, NoisyCubeInstance
from .harness import RateEstimate, TrialReport, failure_rate, run_trials

__version__ = "0.1.0"

__all__ = [
    "BenedekItaiInstance",
    "CategoricalInstance",
    "DimensionError",
    "Distribution",
    "Hypothesis",
    "HypothesisClass",
    "InfeasibleError",
    "LabeledSample",
    "NoisyCubeInstance",
    "RateEstimate",
    "TrialReport",
    "UnlabeledSample",
    "distance_matrix",
    "empirical_distance",
    "exact_distance",
    "failure_rate",
    "run_trials",
    "tv_class_conditional",
]
