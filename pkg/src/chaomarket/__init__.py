"""Market simulator with chaotic pair selection and conservative exchange."""

from .dynamics import (BimapParams, BimapState, DomainEscapeError, Spectrum,
                       Trajectory, bimap_step, find_spectral_peak,
                       power_spectrum, trajectory)
from .market import (InteractionStats, Ledger, MarketConfig, SimulationOutput,
                     classify_agents, run_simulation, select_agents, trade)
from .stats import (AnalysisResult, Ccdf, FitResult, RankProfile,
                    analyze_output, ccdf, fit_exponential, fit_power_law,
                    gini, rank_profile)
from .sweep import SweepRow, SweepSpec, SweepSummary, expand_sweep, run_sweep

__version__ = "0.1.0"

__all__ = [
    "AnalysisResult", "BimapParams", "BimapState", "Ccdf",
    "DomainEscapeError", "FitResult", "InteractionStats", "Ledger",
    "MarketConfig", "RankProfile", "SimulationOutput", "Spectrum",
    "SweepRow", "SweepSpec", "SweepSummary", "Trajectory", "analyze_output",
    "bimap_step", "ccdf", "classify_agents", "expand_sweep",
    "find_spectral_peak", "fit_exponential", "fit_power_law", "gini",
    "power_spectrum", "rank_profile", "run_simulation", "run_sweep",
    "select_agents", "trade", "trajectory", "__version__",
]
