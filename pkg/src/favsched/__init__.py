"""Online makespan scheduling with favorite machines."""

from .algorithms import (
    GGF,
    S_STAR,
    AssignU,
    AssignUConfig,
    AssignUDoubling,
    ConfigError,
    ContractViolation,
    Greedy,
    GreedyFavorite,
    Rescaled,
    TieBreak,
    make_algorithm,
    run,
)
from .model import Instance, Job, ModelError, Schedule, SymmetricInstance, load_instance
from .oracle import OracleBudgetExceeded, exact_opt

__all__ = [
    "GGF", "S_STAR", "AssignU", "AssignUConfig", "AssignUDoubling", "ConfigError",
    "ContractViolation", "Greedy", "GreedyFavorite", "Rescaled", "TieBreak", "make_algorithm",
    "run", "Instance", "Job", "ModelError", "Schedule", "SymmetricInstance", "load_instance",
    "OracleBudgetExceeded", "exact_opt",
]
