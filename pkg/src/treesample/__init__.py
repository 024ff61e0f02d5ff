"""Optimal leaf sampling for multiscale stochastic tree models.

Builds independent-innovations and covariance tree models, evaluates exact
LMMSE estimates of interior nodes from leaf samples, selects optimal leaf
sets by scale-recursive water-filling, and provides brute-force and survey
oracles for verification.
"""

__version__ = "0.1.0"

from .addresses import ROOT, LeafSet, NodeAddress
from .errors import (CapExceededError, ConfigError, DomainError,
                     TreeSampleError)
from .trees import (CovarianceTree, InnovationsTree, build_covariance_tree,
                    build_innovations_tree, build_wig_covariance_tree,
                    matched_innovations_tree, node_covariance, proximity,
                    wig_innovation_variances)
from .synthesis import (PathSynthesis, additive_leaf_values,
                        brownian_innovation_variances,
                        fbm_innovation_variances, synthesize_midpoint_path)
from .estimator import (EstimateReport, LeafCovariance, leaf_covariance,
                        lmmse, parallel_resistor_residual)
from .waterfill import (Allocation, ConcaveTable, MuTables, WaterfillResult,
                        build_mu_tables, clustered_leaf_set,
                        covariance_tree_optimal, covariance_tree_worst,
                        optimal_leaf_sets, uniform_leaf_sample,
                        uniform_split_value, waterfill)
from .oracle import (BruteForceResult, SurveyResult, brute_force_extremes,
                     q_sum, random_pattern_survey, row_sum_eigen_check)
from .config import (load_tree_config, parse_tree_config,
                     serialize_tree_config)

__all__ = [
    "ROOT", "LeafSet", "NodeAddress",
    "TreeSampleError", "ConfigError", "DomainError", "CapExceededError",
    "InnovationsTree", "CovarianceTree", "build_innovations_tree",
    "build_covariance_tree", "build_wig_covariance_tree",
    "matched_innovations_tree", "node_covariance", "proximity",
    "wig_innovation_variances",
    "PathSynthesis", "synthesize_midpoint_path", "additive_leaf_values",
    "brownian_innovation_variances", "fbm_innovation_variances",
    "EstimateReport", "LeafCovariance", "leaf_covariance", "lmmse",
    "parallel_resistor_residual",
    "ConcaveTable", "Allocation", "WaterfillResult", "waterfill",
    "uniform_split_value", "MuTables", "build_mu_tables", "optimal_leaf_sets",
    "uniform_leaf_sample", "clustered_leaf_set", "covariance_tree_optimal",
    "covariance_tree_worst",
    "BruteForceResult", "SurveyResult", "brute_force_extremes",
    "random_pattern_survey", "q_sum", "row_sum_eigen_check",
    "load_tree_config", "parse_tree_config", "serialize_tree_config",
]
