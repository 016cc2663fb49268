"""Cluster-number estimation by matching centroids across random subsamples."""

from .core import ClusterResult, DataError, Dataset, load_csv, save_csv
from .kmeans import KMeansConfig, assign, kmeans, kmeanspp_init, lloyd, within_cluster_ss
from .matching import Matching, centroid_cost_matrix, min_cost_perfect_matching
from .metrics import (
    adjusted_rand_index,
    completeness,
    gs_score,
    homogeneity,
    homogeneity_completeness,
    normalized_mutual_info,
    silhouette_coefficient,
)
from .pipeline import CnakConfig, ScoreCurve, bucketize, cnak_cluster, estimate_k, score_for_k, stability_report
from .sampling import (
    SampleSizePlan,
    covariance_eigenvalues,
    draw_sample,
    marginal_error,
    plan_sample_size,
    sample_size,
)
