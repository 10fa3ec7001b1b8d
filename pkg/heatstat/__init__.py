__version__ = "0.1.0"

from .errors import ConfigError, HeatstatError, NumericalError
from .models import (
    HermitianSpec,
    InitialState,
    Observable,
    ProtocolSpec,
    WaitingTimeDistribution,
)
from .exact import char_fn, conditional_table, heat_distribution, moments
from .montecarlo import estimate_jarzynski, sample_trajectories
from .asymptotics import thermalization_report, zeno_scaling
from .qubit_analytic import QubitParams, qubit_char_fn
from .qutrit_beta import QutritEnsemble, solve_beta_eff
from .scheduler import get_scheduler

__all__ = [
    "HeatstatError",
    "ConfigError",
    "NumericalError",
    "HermitianSpec",
    "Observable",
    "InitialState",
    "WaitingTimeDistribution",
    "ProtocolSpec",
    "conditional_table",
    "heat_distribution",
    "char_fn",
    "moments",
    "sample_trajectories",
    "estimate_jarzynski",
    "thermalization_report",
    "zeno_scaling",
    "QubitParams",
    "qubit_char_fn",
    "QutritEnsemble",
    "solve_beta_eff",
    "get_scheduler",
]
