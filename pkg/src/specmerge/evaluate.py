"""Clustering quality scoring and Monte Carlo experiment orchestration.

Includes the best-match Dice similarity between partitions, the two named
simulation experiments (close JONSWAP spectra; unimodal vs bimodal AR(2)
mixtures) with the standard method lineup, and run-length segmentation of
label sequences for contiguity analysis.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .distances import pairwise_matrix
from .hsm import hsm_cluster
from .linkage import LinkageSpec, linkage_cluster
from .seeding import rng_for
from .simulate import (
    Ar2Spec,
    JonswapParams,
    MixtureDesign,
    jonswap_spectrum,
    simulate_from_spectrum,
    simulate_mixture,
)
from .spectra import TimeSeries, estimation_grid, normalize, smoothed_spectrum

__all__ = [
    "similarity_index",
    "run_experiment",
    "contiguous_segments",
    "ExperimentDesign",
    "ExperimentReport",
    "experiment_1_design",
    "experiment_2_design",
    "elbow_design_a",
    "METHOD_NAMES",
    "cluster_with_method",
]

METHOD_NAMES = ("NP", "LNP", "CEP", "TV", "SKL", "HSM1", "HSM2")

_SPECTRUM_METHODS = {"NP", "LNP", "TV", "SKL"}


def _check_partition(blocks, universe: set[str], name: str):
    seen: set[str] = set()
    for block in blocks:
        if not block:
            raise ValueError(f"{name} partition contains an empty block")
        if seen & set(block):
            raise ValueError(f"{name} partition has overlapping blocks")
        seen |= set(block)
    if seen != universe:
        raise ValueError(f"{name} partition does not cover the id universe")


def similarity_index(truth, found) -> float:
    """Mean best-match Dice overlap between two partitions of one id set.

    For each true block the best ``2 |A & B| / (|A| + |B|)`` overlap over
    found blocks is taken; the index is the average over true blocks.  It is
    1 exactly when the partitions coincide and 0 when no pair of blocks
    intersects.
    """
    truth = [set(b) for b in truth]
    found = [set(b) for b in found]
    universe = set().union(*truth) if truth else set()
    _check_partition(truth, universe, "truth")
    _check_partition(found, universe, "found")
    total = 0.0
    for t in truth:
        total += max(2.0 * len(t & f) / (len(t) + len(f)) for f in found)
    return total / len(truth)


def contiguous_segments(labels) -> list[tuple[int, int, object]]:
    """Maximal runs of equal labels as (start, end, label) with `end`
    exclusive, so durations are ``(end - start) * interval_width``."""
    labels = list(labels)
    if not labels:
        raise ValueError("need at least one label")
    segments = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[start]:
            segments.append((start, i, labels[start]))
            start = i
    return segments


@dataclass(frozen=True)
class ExperimentDesign:
    """A named simulation setting: per replicate it yields labeled series,
    the true partition, and the true cluster count."""

    name: str
    fs: float
    k_true: int
    _factory: object = field(repr=False)

    def simulate(self, n_samples: int, seed: int):
        """Return (series, truth_partition) for one replicate."""
        return self._factory(n_samples, seed)


_EXP1_FS = 1.28
_EXP1_PARAMS = (
    JonswapParams(hs=3.0, tp=3.6 * np.sqrt(3.0)),
    JonswapParams(hs=3.0, tp=4.1 * np.sqrt(3.0)),
)


def _simulate_exp1(n_samples: int, seed: int):
    omega = 2.0 * np.pi * estimation_grid(n_samples, _EXP1_FS)
    series = []
    truth = []
    for gi, p in enumerate(_EXP1_PARAMS):
        target = jonswap_spectrum(p, omega)
        block = set()
        for r in range(5):
            sub = int(rng_for(seed, gi, r).integers(2**63))
            x = simulate_from_spectrum(target, n_samples, _EXP1_FS, sub)
            x = TimeSeries(x.values, _EXP1_FS, id=f"j{gi}-{r}")
            series.append(x)
            block.add(x.id)
        truth.append(block)
    return series, truth


def experiment_1_design() -> ExperimentDesign:
    """Two JONSWAP spectra with Hs = 3 and peak periods 3.6*sqrt(Hs) and
    4.1*sqrt(Hs); five Gaussian-synthesis series per spectrum at 1.28 Hz."""
    return ExperimentDesign("experiment-1", _EXP1_FS, 2, _simulate_exp1)


def _simulate_mixture_replicate(design: MixtureDesign, n_samples: int, seed: int):
    series = simulate_mixture(design, n_samples, seed)
    truth = []
    for i in range(design.n_clusters):
        truth.append({x.id for x in series if x.id.startswith(f"g{i}-")})
    return series, truth


def experiment_2_design() -> ExperimentDesign:
    """Three latent AR(2) processes (peaks 0.10, 0.13, 0.16 Hz, root modulus
    1.1, fs = 1) mixed into three clusters of five series: rows (1,0,0),
    (0,1,0), (0,1,1), plus unit Gaussian noise."""
    fs = 1.0
    latents = tuple(Ar2Spec(eta=e, magnitude=1.1, fs=fs) for e in (0.10, 0.13, 0.16))
    design = MixtureDesign(
        latents=latents,
        loadings=np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 1.0, 1.0]]),
        noise_sd=1.0,
        replicates=5,
    )
    factory = partial(_simulate_mixture_replicate, design)
    return ExperimentDesign("experiment-2", fs, 3, factory)


def elbow_design_a(replicates: int = 5) -> ExperimentDesign:
    """Five latent AR(2) processes (peaks 2, 6, 10, 21, 40 Hz, root modulus
    1.01, fs = 100), one latent per cluster, unit noise."""
    fs = 100.0
    latents = tuple(
        Ar2Spec(eta=e, magnitude=1.01, fs=fs) for e in (2.0, 6.0, 10.0, 21.0, 40.0)
    )
    design = MixtureDesign(
        latents=latents,
        loadings=np.eye(5),
        noise_sd=1.0,
        replicates=replicates,
    )
    factory = partial(_simulate_mixture_replicate, design)
    return ExperimentDesign("elbow-a", fs, 5, factory)


DESIGNS = {
    "1": experiment_1_design,
    "2": experiment_2_design,
    "elbow-a": elbow_design_a,
}


def cluster_with_method(
    series: list[TimeSeries],
    method: str,
    k: int,
    bandwidth: float | None = None,
    spectra=None,
) -> list[set[str]]:
    """Cut one of the named clustering methods at k clusters.

    HSM1/HSM2 run the merger algorithm (single/average variant); the other
    names build the corresponding dissimilarity matrix once and agglomerate
    it with complete linkage.  Precomputed normalized spectra may be passed
    to avoid re-estimation across methods.
    """
    if method not in METHOD_NAMES:
        raise ValueError(f"unknown method {method!r}; choose from {METHOD_NAMES}")
    if method == "HSM1":
        return hsm_cluster(series, "single", bandwidth).labels_at(k)
    if method == "HSM2":
        return hsm_cluster(series, "average", bandwidth).labels_at(k)
    labels = [x.id for x in series]
    if method == "CEP":
        dmat = pairwise_matrix(series, "CEP", labels=labels)
    else:
        if spectra is None:
            spectra = [normalize(smoothed_spectrum(x, bandwidth)) for x in series]
        dmat = pairwise_matrix(spectra, method, labels=labels)
    history = linkage_cluster(dmat, LinkageSpec("complete", method))
    return history.labels_at(k)


@dataclass
class ExperimentReport:
    """Mean and per-replicate similarity indices of an experiment run."""

    design: str
    methods: tuple[str, ...]
    lengths: tuple[int, ...]
    n_replicates: int
    seed: int
    raw: dict  # (method, T) -> np.ndarray of per-replicate indices
    k_true: int

    def mean(self, method: str, n_samples: int) -> float:
        return float(np.mean(self.raw[(method, n_samples)]))

    def table_rows(self) -> list[dict]:
        rows = []
        for t_len in self.lengths:
            row = {"T": t_len}
            for m in self.methods:
                row[m] = self.mean(m, t_len)
            rows.append(row)
        return rows


def _replicate_indices(args) -> list[float]:
    design, methods, n_samples, seed, length_index, rep, bandwidth = args
    rep_seed = int(rng_for(seed, length_index, rep).integers(2**63))
    series, truth = design.simulate(n_samples, rep_seed)
    spectra = None
    if any(m in _SPECTRUM_METHODS for m in methods):
        spectra = [normalize(smoothed_spectrum(x, bandwidth)) for x in series]
    out = []
    for m in methods:
        found = cluster_with_method(
            series, m, design.k_true, bandwidth=bandwidth, spectra=spectra
        )
        out.append(similarity_index(truth, found))
    return out


def run_experiment(
    design: ExperimentDesign,
    methods,
    lengths,
    n_replicates: int,
    seed: int,
    bandwidth: float | None = None,
    workers: int = 1,
) -> ExperimentReport:
    """Monte Carlo comparison of clustering methods on a simulation design.

    Every replicate simulates fresh series from the design, clusters them
    with each requested method cut at the true cluster count, and scores the
    result against the true partition.  Replicate streams derive from the
    root seed and the replicate index only, so reports are reproducible and
    independent of the worker count.
    """
    methods = tuple(methods)
    lengths = tuple(int(t) for t in lengths)
    for m in methods:
        if m not in METHOD_NAMES:
            raise ValueError(f"unknown method {m!r}; choose from {METHOD_NAMES}")
    raw = {}
    for ti, t_len in enumerate(lengths):
        jobs = [
            (design, methods, t_len, seed, ti, rep, bandwidth)
            for rep in range(n_replicates)
        ]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_replicate_indices, jobs))
        else:
            results = [_replicate_indices(j) for j in jobs]
        per_method = np.asarray(results)  # shape (n_replicates, n_methods)
        for mi, m in enumerate(methods):
            raw[(m, t_len)] = per_method[:, mi]
    return ExperimentReport(
        design=design.name,
        methods=methods,
        lengths=lengths,
        n_replicates=n_replicates,
        seed=seed,
        raw=raw,
        k_true=design.k_true,
    )
