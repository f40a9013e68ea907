"""Clustering of stationary time series by normalized spectral shape.

Series are compared through the total variation distance between their
normalized smoothed spectral densities and grouped agglomeratively, either
re-estimating each merged cluster's spectrum (the merger algorithm) or over
a fixed dissimilarity matrix with classical linkage.  Simulators, competitor
distances, cluster-count selection and a Monte Carlo experiment harness are
included.
"""

from .distances import (
    Dissimilarity,
    DissimilarityMatrix,
    cepstral_coefficients,
    cepstral_distance,
    lnp_distance,
    np_distance,
    pairwise_matrix,
    skl_distance,
    tv_distance,
)
from .evaluate import (
    ExperimentDesign,
    ExperimentReport,
    contiguous_segments,
    elbow_design_a,
    experiment_1_design,
    experiment_2_design,
    run_experiment,
    similarity_index,
)
from .hsm import MergeHistory, MergeStep, hsm_cluster, tie_break
from .linkage import LinkageSpec, linkage_cluster, linkage_value
from .modelselect import (
    BootstrapTestResult,
    ElbowReport,
    bootstrap_tv_sample,
    choose_k,
    elbow,
    test_k_vs_k_minus_1,
)
from .simulate import (
    Ar2Spec,
    JonswapParams,
    MixtureDesign,
    ar2_coefficients,
    ar2_from_coefficients,
    ar2_spectral_density,
    jonswap_spectrum,
    simulate_ar2,
    simulate_from_spectrum,
    simulate_mixture,
    simulate_white_noise,
)
from .spectra import (
    DegenerateSpectrumError,
    SpectralDensity,
    TimeSeries,
    average_spectrum,
    concat_spectrum,
    normalize,
    periodogram,
    smoothed_spectrum,
)

__version__ = "0.1.0"
