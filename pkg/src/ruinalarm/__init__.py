"""Ruin-time simulation, alarm times and capital-injection comparisons for compound-Poisson risk processes."""

from .model import (
    CapitalSchedule,
    Degenerate,
    Exponential,
    Logarithmic,
    Pareto,
    RiskModel,
    TabulatedDiscrete,
    capital_level,
    loading_factor,
    mean_severity,
)
from .simulate import (
    PsiSurface,
    RuinCDF,
    estimate_conditional_ruin_cdf,
    estimate_psi_surface,
    estimate_ruin_cdf,
    ruin_time,
    simulate_path,
)

__version__ = "0.1.0"
