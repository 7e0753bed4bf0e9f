"""Time-varying Granger causality tests for attention indices and asset returns."""

from tvgc.dataset import AlignedDataset, RawSeries, align, log_returns, stitch_gsvi
from tvgc.errors import DataError, EstimationError, TvgcError
from tvgc.var import VarFit, VarSpec, fit, select_lag_bic
from tvgc.wald import SelectionMatrix, WaldResult, build_selection, wald_homoskedastic, wald_robust
from tvgc.procedures import (
    StatSequence,
    forward_sequence,
    recursive_evolving_sequence,
    rolling_sequence,
    statistic_sequences,
)
from tvgc.bootstrap import BootstrapConfig, CriticalValueSequence, critical_values, fit_null_model
from tvgc.dating import CausalEpisode, date_episodes, episode_report
from tvgc.stationarity import UnitRootResult, adf_test, pp_test
from tvgc.simulation import Noise, SwitchDgp, TestConfig, run_experiment, simulate_dgp

__version__ = "0.1.0"

__all__ = [
    "AlignedDataset",
    "BootstrapConfig",
    "CausalEpisode",
    "CriticalValueSequence",
    "DataError",
    "EstimationError",
    "Noise",
    "RawSeries",
    "SelectionMatrix",
    "StatSequence",
    "SwitchDgp",
    "TestConfig",
    "TvgcError",
    "UnitRootResult",
    "VarFit",
    "VarSpec",
    "WaldResult",
    "adf_test",
    "align",
    "build_selection",
    "critical_values",
    "date_episodes",
    "episode_report",
    "fit",
    "fit_null_model",
    "forward_sequence",
    "log_returns",
    "pp_test",
    "recursive_evolving_sequence",
    "rolling_sequence",
    "run_experiment",
    "select_lag_bic",
    "simulate_dgp",
    "statistic_sequences",
    "stitch_gsvi",
    "wald_homoskedastic",
    "wald_robust",
]
