"""Choosing the number of clusters.

Two criteria over a merge history: the empirical elbow of the minimum-TV
trajectory (largest second difference of the merge cost as a function of the
cluster count), and a bootstrap hypothesis test of "k-1 clusters" against
"k clusters" whose null distribution is sampled by multiplying the common
cluster spectrum with smoothed periodograms of fresh white noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hsm import MergeHistory
from .linkage import linkage_value
from .seeding import rng_for
from .spectra import (
    SpectralDensity,
    average_spectrum,
    default_bandwidth,
    estimation_grid,
    _lag_window_values,
)

__all__ = [
    "ElbowReport",
    "BootstrapTestResult",
    "elbow",
    "bootstrap_tv_sample",
    "test_k_vs_k_minus_1",
    "choose_k",
    "DEFAULT_BOOTSTRAP_DRAWS",
]

DEFAULT_BOOTSTRAP_DRAWS = 500
MIN_BOOTSTRAP_DRAWS = 100
_CURVATURE_TOL = 1e-12


@dataclass(frozen=True)
class ElbowReport:
    """Trajectory of merge costs with the elbow suggestion.

    `cluster_counts` runs N-1..1 and aligns with `trajectory`;
    `drop_scores` maps each interior count k to the second difference
    ``t(k+1) - 2 t(k) + t(k-1)`` of the cost read as a function of k.
    `low_confidence` marks trajectories without usable curvature, for which
    the suggestion falls back to one cluster.
    """

    cluster_counts: np.ndarray
    trajectory: np.ndarray
    suggested_k: int
    drop_scores: dict[int, float]
    low_confidence: bool = False


@dataclass(frozen=True)
class BootstrapTestResult:
    """Outcome of one "k-1 vs k clusters" bootstrap test."""

    k: int
    observed: float
    boot_sample: np.ndarray
    p_value: float
    alpha: float
    reject: bool


def elbow(history: MergeHistory) -> ElbowReport:
    """Suggest a cluster count from the curvature of the merge-cost
    trajectory.

    The cost of the merge producing k clusters, viewed as a function of k,
    drops steeply until the true cluster count and flattens afterwards; the
    suggestion is the k with the largest discrete second difference.  A
    trajectory with no curvature (e.g. exactly linear) yields ``suggested_k
    = 1`` flagged as low confidence.
    """
    n = history.n_series
    if n < 4:
        raise ValueError("elbow criterion needs at least 4 series")
    counts = np.arange(n - 1, 0, -1)
    traj = history.trajectory

    cost_at = {k: traj[n - 1 - k] for k in range(1, n)}
    scores = {
        k: cost_at[k + 1] - 2.0 * cost_at[k] + cost_at[k - 1]
        for k in range(2, n - 1)
    }
    # Ties resolve to the smallest count.
    best_k = min(scores, key=lambda k: (-scores[k], k))
    if scores[best_k] <= _CURVATURE_TOL:
        return ElbowReport(counts, traj, 1, scores, low_confidence=True)
    return ElbowReport(counts, traj, int(best_k), scores, low_confidence=False)


def _noise_spectra(
    n_draws: int, n_samples: int, bandwidth: float, rng: np.random.Generator
) -> np.ndarray:
    """Smoothed periodograms of fresh N(0,1) noise, one draw per row."""
    rows = rng.standard_normal((n_draws, n_samples))
    return _lag_window_values(rows, bandwidth)


def bootstrap_tv_sample(
    f: SpectralDensity,
    n_samples: int,
    n_draws: int,
    seed: int,
    g1: int = 1,
    g2: int = 1,
    link: str = "complete",
    bandwidth: float | None = None,
    fs: float | None = None,
) -> np.ndarray:
    """Bootstrap sample of the TV distance under a common spectrum `f`.

    Each bootstrap density multiplies `f` pointwise by the smoothed
    periodogram of fresh length-T N(0,1) noise and renormalizes.  With
    ``g1 = g2 = 1`` each draw is the TV distance between two such densities
    (the merger-algorithm case); with larger group sizes, ``g1 + g2``
    densities are drawn and the draw is the complete or average linkage
    value between the two groups (the classical-clustering case).

    Parameters
    ----------
    f : SpectralDensity
        Normalized common spectrum under the null hypothesis.
    n_samples : int
        Length of the original series (drives both the noise length and its
        default smoothing bandwidth 100/T).
    n_draws : int
        Bootstrap sample size M, at least 100.
    seed : int
        Root seed for the noise streams.
    g1, g2 : int
        Group sizes; both 1 reduces the statistic to a single TV distance.
    link : {"complete", "average"}
        Group statistic when g1 * g2 > 1.
    bandwidth, fs : optional
        Smoothing bandwidth for the noise periodograms (default 100/T) and
        sampling frequency of the grid (default inferred from `f`).
    """
    if not f.normalized:
        raise ValueError("the common spectrum must be normalized")
    if n_draws < MIN_BOOTSTRAP_DRAWS:
        raise ValueError(f"need at least {MIN_BOOTSTRAP_DRAWS} bootstrap draws")
    if g1 < 1 or g2 < 1:
        raise ValueError("group sizes must be positive")
    if link not in ("complete", "average"):
        raise ValueError("link must be 'complete' or 'average'")
    if bandwidth is None:
        bandwidth = default_bandwidth(n_samples)
    if fs is None:
        # Canonical estimation grids have step fs/T and (T-1)//2 points.
        fs = f.df * (2 * len(f) + 1)

    grid = estimation_grid(n_samples, fs)
    base = np.interp(grid, f.freqs, f.values)
    d_nu = fs / n_samples
    rng = rng_for(seed)

    group = g1 + g2
    stats = np.empty(n_draws)
    chunk = max(1, 512 // group)
    done = 0
    while done < n_draws:
        todo = min(chunk, n_draws - done)
        noise = _noise_spectra(todo * group, n_samples, bandwidth, rng)
        boots = base[None, :] * noise
        totals = boots.sum(axis=1) * d_nu
        if np.any(totals <= 0):
            raise ValueError("degenerate bootstrap density")
        boots /= totals[:, None]
        boots = boots.reshape(todo, group, -1)
        for b in range(todo):
            first = boots[b, :g1]
            second = boots[b, g1:]
            pair_tv = [
                min(1.0, max(0.0, 1.0 - np.minimum(u, v).sum() * d_nu))
                for u in first
                for v in second
            ]
            stats[done + b] = (
                max(pair_tv) if link == "complete" else sum(pair_tv) / len(pair_tv)
            )
        done += todo
    return stats


def _common_spectrum(history: MergeHistory, k: int, spectra) -> tuple:
    """Null-hypothesis common spectrum and group sizes for the merge that
    produced k-1 clusters."""
    step = history.step_for(k - 1)
    size_left = len(history.cluster_members(step.left))
    size_right = len(history.cluster_members(step.right))
    if history.step_representatives is not None:
        idx = history.n_series - 1 - (k - 1)
        left_rep, right_rep, _ = history.step_representatives[idx]
        common = average_spectrum([left_rep, right_rep], [size_left, size_right])
    else:
        if spectra is None:
            raise ValueError(
                "this merge history carries no spectra; pass per-series "
                "normalized spectra via `spectra`"
            )
        by_id = dict(spectra) if not hasattr(spectra, "keys") else spectra
        members = [
            history.series_ids[i]
            for i in history.cluster_members(step.left)
            + history.cluster_members(step.right)
        ]
        common = average_spectrum(
            [by_id[sid] for sid in members], [1.0] * len(members)
        )
    return common, size_left, size_right, step.value


def test_k_vs_k_minus_1(
    history: MergeHistory,
    k: int,
    n_draws: int = DEFAULT_BOOTSTRAP_DRAWS,
    alpha: float = 0.05,
    seed: int = 0,
    spectra=None,
    bandwidth: float | None = None,
) -> BootstrapTestResult:
    """Bootstrap test of ``H0: k-1 clusters`` against ``H_A: k clusters``.

    The observed statistic is the dissimilarity of the merge that produced
    the (k-1)-cluster partition.  Under the null the two merged clusters
    share a spectrum, taken as the member-count-weighted average of their
    representatives; the bootstrap sample of the statistic comes from
    `bootstrap_tv_sample` (single TV for merger histories, the recorded
    linkage over groups of the clusters' sizes for classical histories).
    The p-value is ``(1 + #{draws >= observed}) / (M + 1)`` and the null is
    rejected when it falls below `alpha`.

    For classical (linkage) histories, which carry no spectra, pass
    `spectra` as a mapping from series id to its normalized spectrum.
    """
    n = history.n_series
    if not 2 <= k <= n:
        raise ValueError(f"k must lie in 2..{n}")
    if history.series_length is None:
        raise ValueError("history does not record the original series length")
    common, g_left, g_right, observed = _common_spectrum(history, k, spectra)
    if history.method.startswith("hsm"):
        g1 = g2 = 1
        link = "complete"
    else:
        g1, g2 = g_left, g_right
        link = history.method.split("-", 1)[1]
    boot = bootstrap_tv_sample(
        common,
        history.series_length,
        n_draws,
        seed,
        g1=g1,
        g2=g2,
        link=link,
        bandwidth=bandwidth,
        fs=history.fs,
    )
    p_value = (1.0 + np.count_nonzero(boot >= observed)) / (n_draws + 1.0)
    return BootstrapTestResult(
        k=k,
        observed=float(observed),
        boot_sample=boot,
        p_value=float(p_value),
        alpha=alpha,
        reject=bool(p_value < alpha),
    )


def choose_k(
    history: MergeHistory,
    method: str = "elbow",
    n_draws: int = DEFAULT_BOOTSTRAP_DRAWS,
    alpha: float = 0.05,
    seed: int = 0,
    spectra=None,
    bandwidth: float | None = None,
) -> int:
    """Pick a cluster count by the elbow or by sequential bootstrap tests.

    The sequential walk follows the merge sequence backwards: it tests
    "k vs k+1 clusters" for k = 1, 2, ... and returns the first k whose
    merge is not rejected, i.e. merging k+1 clusters into k was justified
    but no earlier stop was.  If every test rejects, all N series stand.
    """
    if method == "elbow":
        return elbow(history).suggested_k
    if method != "bootstrap":
        raise ValueError("method must be 'elbow' or 'bootstrap'")
    n = history.n_series
    for k in range(1, n):
        result = test_k_vs_k_minus_1(
            history,
            k + 1,
            n_draws=n_draws,
            alpha=alpha,
            seed=seed,
            spectra=spectra,
            bandwidth=bandwidth,
        )
        if not result.reject:
            return k
    return n
