"""Graph sub-sampling and divide-and-conquer structure detection.

The package provides seven graph sub-sampling schemes, a
divide-and-conquer community pipeline that averages per-sub-sample
co-clustering indicators, a divide-and-conquer core-periphery pipeline
that averages per-sub-sample core indicators, closed-form coverage
theory for sub-sampling on core-periphery block models, block-model
generators, evaluation metrics, and a reproducible experiment harness.
"""

from .community import (ClusterAccumulator, ClusteringMatrixEstimate,
                        PaceResult, accumulate, choose_beta, combine,
                        detect_communities_greedy, extract_labels_kmeans,
                        run_pace)
from .coreperiphery import (CoreScore, CoreSweep, be_metric,
                            binarize_by_sweep, optimize_core_labels, run_cp)
from .generators import (SbmSpec, cp_sbm_from_settings, expected_edge_count,
                         generate_sbm)
from .graph import (Graph, SubGraph, component_labels, from_edge_list,
                    induced_subgraph, largest_connected_component,
                    read_edge_list, read_labels, take_subgraph,
                    write_edge_list, write_labels)
from .harness import (CSV_COLUMNS, ExperimentConfig, run_real_community,
                      run_real_cp, run_setting, setting_config,
                      write_results)
from .metrics import (ari, auc, jaccard, misclustering_cp,
                      misclustering_pace, modularity)
from .rngs import as_rng, derive_rng
from .sampling import SCHEMES, sample
from .theory import (CpSbmParams, expected_uncovered_core_fraction,
                     mc_expected_core_sampled, rw_expected_core_nodes,
                     rw_expected_core_nodes_matrix, xi, xi_limit)

__version__ = "0.1.0"

__all__ = [
    "ClusterAccumulator", "ClusteringMatrixEstimate", "PaceResult",
    "accumulate", "choose_beta", "combine", "detect_communities_greedy",
    "extract_labels_kmeans", "run_pace",
    "CoreScore", "CoreSweep", "be_metric", "binarize_by_sweep",
    "optimize_core_labels", "run_cp",
    "SbmSpec", "cp_sbm_from_settings", "expected_edge_count", "generate_sbm",
    "Graph", "SubGraph", "component_labels", "from_edge_list",
    "induced_subgraph", "largest_connected_component", "read_edge_list",
    "read_labels", "take_subgraph", "write_edge_list", "write_labels",
    "CSV_COLUMNS", "ExperimentConfig", "run_real_community", "run_real_cp",
    "run_setting", "setting_config", "write_results",
    "ari", "auc", "jaccard", "misclustering_cp", "misclustering_pace",
    "modularity",
    "as_rng", "derive_rng",
    "SCHEMES", "sample",
    "CpSbmParams", "expected_uncovered_core_fraction",
    "mc_expected_core_sampled", "rw_expected_core_nodes",
    "rw_expected_core_nodes_matrix", "xi", "xi_limit",
    "__version__",
]
