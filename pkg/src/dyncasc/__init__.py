"""Dynamic covariate-assisted spectral co-clustering of directed networks.

Typical use::

    from dyncasc import SimConfig, gen_network, DetectConfig, detect_communities
    adj, cov, truth, _ = gen_network(SimConfig(n=100, degree_scale="block_size", seed=1))
    est = detect_communities(adj, cov, DetectConfig(4, 4))
"""

from .backtest import (PortfolioResult, form_portfolio, momentum_signal, newey_west_tstat, run_backtest,
                       split_by_regime)
from .bench import BenchConfig, run_bench, summarize
from .cluster import (DetectConfig, KMediansResult, cluster_similarities, detect_casc_static, detect_communities,
                      detect_disim_dc, spherical_kmedians, spherical_normalize, truncated_svd)
from .errors import *  # noqa: F401,F403
from .evaluation import (community_correlations, community_degrees, confusion, miscluster_rate,
                         miscluster_rate_bruteforce, miscluster_sequence)
from .graph import (AlphaSchedule, alpha_tune, covariate_similarity, covariate_weights, degrees, laplacian,
                    raw_similarities, similarity)
from .kernel import (KernelSpec, SimilaritySequence, build_kernel, kernel_for, lepski_bandwidth, smooth_similarity,
                     spectral_norm)
from .model import (AdjacencySequence, BlockProbabilitySequence, CovariateMatrix, CovariateWeights, DegreeParameters,
                    MembershipSequence, NodeIndex, ReturnPanel, validate_bundle)
from .netinfer import LassoConfig, adaptive_lasso_fit, infer_network, infer_network_sequence, kkt_violation
from .simulate import SimConfig, gen_memberships, gen_network, gen_population_similarity, population_similarity

__version__ = "0.1.0"
