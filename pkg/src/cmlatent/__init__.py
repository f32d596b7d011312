"""Conjugate hierarchical models for natural exponential family data."""

from .data_model import DataModel
from .design import gen_count_design, gen_sim_design, moran_basis
from .diagnostics import ess_basic, split_rhat
from .dy import dy_logpdf, dy_sample
from .cm import CMParams, CMcSpec, cm_logpdf, cm_moments, cm_sample, \
    cmc_moments, cmc_sample, gaussian_limit
from .partition import dy_moments
from .harness import (ExperimentSpec, big_n_experiment, compare_experiment,
                      fit_command, predict_command, tspe)
from .lcm import (ChainOutput, HyperParams, LCMConfig, dic, predict_holdout,
                  predict_mean, run_chain)
from .lgp import LGPConfig, lgp_log_joint, lgp_run_chain
from .partition import InvalidParameterError, PartitionKind
from .samplers import RngStream

__all__ = [
    "CMParams", "CMcSpec", "ChainOutput", "DataModel", "ExperimentSpec",
    "HyperParams", "InvalidParameterError", "LCMConfig", "LGPConfig",
    "PartitionKind", "RngStream", "big_n_experiment", "cm_logpdf",
    "cm_moments", "cm_sample", "cmc_moments", "cmc_sample",
    "compare_experiment", "dic", "dy_logpdf", "dy_moments", "dy_sample",
    "ess_basic", "fit_command", "gaussian_limit", "gen_count_design",
    "gen_sim_design", "lgp_log_joint", "lgp_run_chain", "moran_basis",
    "predict_command", "predict_holdout", "predict_mean", "run_chain",
    "split_rhat", "tspe",
]

__version__ = "0.1.0"
