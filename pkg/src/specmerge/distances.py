"""Dissimilarity measures between spectral densities.

The total variation distance ``1 - integral(min(f, g))`` between normalized
densities is the core measure; the Euclidean (NP), log-Euclidean (LNP),
cepstral (CEP) and symmetric Kullback-Leibler (SKL) distances are the
competitors used in the comparative experiments.  All integrals are left
Riemann sums on the density grids; ordinates are floored at ``LOG_FLOOR``
before any logarithm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectra import SpectralDensity, TimeSeries, align_grids

__all__ = [
    "Dissimilarity",
    "DissimilarityMatrix",
    "tv_distance",
    "np_distance",
    "lnp_distance",
    "cepstral_distance",
    "cepstral_coefficients",
    "skl_distance",
    "pairwise_matrix",
    "LOG_FLOOR",
    "DEFAULT_CEPSTRAL_ORDER",
]

LOG_FLOOR = 1e-12
DEFAULT_CEPSTRAL_ORDER = 20

MEASURES = ("TV", "NP", "LNP", "CEP", "SKL")


@dataclass(frozen=True)
class Dissimilarity:
    """A nonnegative dissimilarity value tagged with the measure kind."""

    value: float
    kind: str

    def __post_init__(self):
        if self.kind not in MEASURES:
            raise ValueError(f"unknown dissimilarity kind {self.kind!r}")
        if not self.value >= 0.0:
            raise ValueError("dissimilarity values are nonnegative")


@dataclass(frozen=True)
class DissimilarityMatrix:
    """Symmetric matrix of pairwise dissimilarities with a zero diagonal."""

    labels: tuple[str, ...]
    entries: np.ndarray
    kind: str = "TV"

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        k = len(self.labels)
        if e.shape != (k, k):
            raise ValueError("entry matrix shape must match the label count")
        if not np.array_equal(e, e.T):
            raise ValueError("dissimilarity matrix must be exactly symmetric")
        if np.any(np.diag(e) != 0.0):
            raise ValueError("dissimilarity matrix must have a zero diagonal")
        if e.min() < 0:
            raise ValueError("dissimilarity entries must be nonnegative")
        e = e.copy()
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "labels", tuple(self.labels))


def _require_normalized(f: SpectralDensity, g: SpectralDensity, what: str):
    if not (f.normalized and g.normalized):
        raise ValueError(f"{what} requires normalized spectral densities")


def _common_grid_values(f, g) -> tuple[np.ndarray, np.ndarray, float]:
    fa, ga = align_grids(f, g)
    return fa.values, ga.values, fa.df


def tv_value(f: SpectralDensity, g: SpectralDensity) -> float:
    """Total variation distance as a bare float (hot-loop form)."""
    _require_normalized(f, g, "the TV distance")
    fv, gv, df = _common_grid_values(f, g)
    d = 1.0 - np.minimum(fv, gv).sum() * df
    return min(1.0, max(0.0, d))


def tv_distance(f: SpectralDensity, g: SpectralDensity) -> Dissimilarity:
    """Total variation distance, one minus the common area under f and g.

    Both inputs must be normalized; differing grids are aligned by the
    resampling rule in `spectra.align_grids` and renormalized there.  The
    value is clamped to [0, 1] to absorb float drift.
    """
    return Dissimilarity(tv_value(f, g), "TV")


def np_distance(f: SpectralDensity, g: SpectralDensity) -> Dissimilarity:
    """Euclidean distance between spectra, scaled by 1/n over n ordinates."""
    fv, gv, _ = _common_grid_values(f, g)
    n = fv.size
    return Dissimilarity(float(np.sqrt(np.sum((fv - gv) ** 2)) / n), "NP")


def lnp_distance(f: SpectralDensity, g: SpectralDensity) -> Dissimilarity:
    """Euclidean distance between log spectra, scaled by 1/n."""
    fv, gv, _ = _common_grid_values(f, g)
    lf = np.log(np.maximum(fv, LOG_FLOOR))
    lg = np.log(np.maximum(gv, LOG_FLOOR))
    n = fv.size
    return Dissimilarity(float(np.sqrt(np.sum((lf - lg) ** 2)) / n), "LNP")


def _full_log_periodogram(x: TimeSeries) -> np.ndarray:
    """log periodogram on the full DFT grid m = 0..T-1 (floored)."""
    t_len = len(x)
    y = x.values - x.values.mean()
    spec = np.abs(np.fft.fft(y)) ** 2 / t_len
    return np.log(np.maximum(spec, LOG_FLOOR))


def _cepstral_from_log_periodogram(log_pgram: np.ndarray, order: int) -> np.ndarray:
    t_len = log_pgram.size
    lam = np.arange(t_len) / t_len
    k = np.arange(1, order + 1)
    # theta_k = integral over (0,1) of log I(lambda) cos(2 pi k lambda)
    return (np.cos(2.0 * np.pi * np.outer(k, lam)) @ log_pgram) / t_len


def cepstral_coefficients(x: TimeSeries, order: int) -> np.ndarray:
    """Cepstral coefficients theta_1..theta_order of the log periodogram.

    Coefficients are Riemann sums of ``log I(lambda) cos(2 pi k lambda)`` on
    the rescaled frequency grid ``lambda = m / T``; the scale term theta_0 is
    not included.
    """
    if order < 1:
        raise ValueError("cepstral order must be >= 1")
    n = (len(x) - 1) // 2
    if order > n:
        raise ValueError(f"cepstral order {order} exceeds the grid size {n}")
    return _cepstral_from_log_periodogram(_full_log_periodogram(x), order)


def cepstral_distance(
    x: TimeSeries, y: TimeSeries, order: int = DEFAULT_CEPSTRAL_ORDER
) -> Dissimilarity:
    """Squared Euclidean distance between cepstral coefficient vectors."""
    cx = cepstral_coefficients(x, order)
    cy = cepstral_coefficients(y, order)
    return Dissimilarity(float(np.sum((cx - cy) ** 2)), "CEP")


def skl_distance(f: SpectralDensity, g: SpectralDensity) -> Dissimilarity:
    """Symmetric Kullback-Leibler distance between normalized densities."""
    _require_normalized(f, g, "the symmetric KL distance")
    fv, gv, df = _common_grid_values(f, g)
    fv = np.maximum(fv, LOG_FLOOR)
    gv = np.maximum(gv, LOG_FLOOR)
    log_ratio = np.log(fv) - np.log(gv)
    d = np.sum(fv * log_ratio) * df + np.sum(gv * -log_ratio) * df
    return Dissimilarity(max(0.0, float(d)), "SKL")


def _measure_fn(measure, order: int):
    if callable(measure):
        return measure
    if measure == "TV":
        return lambda a, b: tv_value(a, b)
    if measure == "NP":
        return lambda a, b: np_distance(a, b).value
    if measure == "LNP":
        return lambda a, b: lnp_distance(a, b).value
    if measure == "SKL":
        return lambda a, b: skl_distance(a, b).value
    if measure == "CEP":
        return lambda a, b: cepstral_distance(a, b, order).value
    raise ValueError(f"unknown measure {measure!r}")


def pairwise_matrix(
    items,
    measure="TV",
    labels: list[str] | None = None,
    cepstral_order: int = DEFAULT_CEPSTRAL_ORDER,
) -> DissimilarityMatrix:
    """Symmetric dissimilarity matrix over a list of items.

    `items` are spectral densities for TV/NP/LNP/SKL and time series for
    CEP; `measure` may also be a callable ``(a, b) -> float``.  Each pair is
    evaluated once and mirrored, so symmetry is exact.
    """
    k = len(items)
    if k < 2:
        raise ValueError("pairwise matrix needs at least two items")
    fn = _measure_fn(measure, cepstral_order)
    if labels is None:
        labels = [getattr(it, "id", "") or f"item{i}" for i, it in enumerate(items)]
    entries = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            d = float(fn(items[i], items[j]))
            entries[i, j] = d
            entries[j, i] = d
    kind = measure if isinstance(measure, str) else "TV"
    return DissimilarityMatrix(tuple(labels), entries, kind=kind)
