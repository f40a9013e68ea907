"""Spectral density estimation for stationary time series.

The estimators here produce the clustering feature used throughout the
package: the spectral density tabulated on the positive Fourier grid
``freq[k] = k * fs / T`` for ``k = 1..(T-1)//2`` (frequency zero and the
Nyquist ordinate are excluded).  All integrals are left Riemann sums with
step ``fs / T``, so a normalized density sums to one under that rule.

Smoothing is a lag-window estimate with a Parzen window.  The dimensionless
bandwidth ``b`` (fraction of the frequency axis, default ``100 / T``) maps to
the truncation lag ``L = round(LAG_CONSTANT / b)``.  The sampled Parzen
window's transform is nonnegative, so estimates are nonnegative up to float
noise, and its half-power width is ``1.276 / L`` in normalized frequency,
i.e. roughly ``(1.276 / LAG_CONSTANT) * b * fs`` Hz for the mapping used
here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TimeSeries",
    "SpectralDensity",
    "DegenerateSpectrumError",
    "periodogram",
    "smoothed_spectrum",
    "normalize",
    "concat_spectrum",
    "average_spectrum",
    "align_grids",
    "parzen_window",
    "estimation_grid",
    "default_bandwidth",
    "LAG_CONSTANT",
]

MIN_LENGTH = 8

# Truncation-lag mapping constant: L = round(LAG_CONSTANT / bandwidth).
# Calibrated so that sharp autoregressive peaks survive smoothing at the
# default bandwidth while estimate noise stays low enough for distance-based
# clustering; kept fixed package-wide.
LAG_CONSTANT = 8.0

# Default bandwidths above this are clamped so the open (0, 1/2) precondition
# still holds for very short series.
_MAX_DEFAULT_BANDWIDTH = 0.45


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled real-valued signal.

    Attributes
    ----------
    values : np.ndarray
        The samples, finite floats.
    fs : float
        Sampling frequency in Hertz, > 0.
    id : str
        Opaque label used in partitions and serialized outputs.
    """

    values: np.ndarray
    fs: float
    id: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("series values must be one-dimensional")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"series {self.id!r} contains non-finite samples")
        if not self.fs > 0:
            raise ValueError("sampling frequency must be positive")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "fs", float(self.fs))

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class SpectralDensity:
    """Nonnegative function tabulated on a uniform, strictly increasing
    frequency grid (Hertz).

    ``normalized`` marks densities whose left Riemann sum is one; those are
    the objects the distance functions accept.  ``bandwidth`` records the
    dimensionless smoothing bandwidth used, if any.
    """

    freqs: np.ndarray
    values: np.ndarray
    normalized: bool = False
    bandwidth: float | None = field(default=None)

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if f.ndim != 1 or v.ndim != 1 or f.size != v.size:
            raise ValueError("freqs and values must be 1-d arrays of equal length")
        if f.size < 2:
            raise ValueError("spectral grid needs at least two points")
        steps = np.diff(f)
        if not np.all(steps > 0):
            raise ValueError("frequency grid must be strictly increasing")
        if not np.allclose(steps, steps[0], rtol=1e-8, atol=0.0):
            raise ValueError("frequency grid must be uniformly spaced")
        if v.min() < 0:
            raise ValueError("spectral ordinates must be nonnegative")
        f = f.copy()
        v = v.copy()
        f.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "values", v)

    @property
    def df(self) -> float:
        """Grid step in Hertz."""
        return float(self.freqs[1] - self.freqs[0])

    def integral(self) -> float:
        """Left Riemann sum of the density."""
        return float(self.values.sum() * self.df)

    def __len__(self):
        return self.values.size


class DegenerateSpectrumError(ValueError):
    """Raised when a zero-variance series yields an all-zero spectrum."""


def estimation_grid(n_samples: int, fs: float) -> np.ndarray:
    """Positive Fourier frequencies k*fs/T for k = 1..(T-1)//2, in Hertz."""
    n = (n_samples - 1) // 2
    return np.arange(1, n + 1) * (fs / n_samples)


def default_bandwidth(n_samples: int) -> float:
    """Default dimensionless smoothing bandwidth, 100/T (clamped below 1/2)."""
    return min(100.0 / n_samples, _MAX_DEFAULT_BANDWIDTH)


def parzen_window(u) -> np.ndarray:
    """Parzen lag window on |u| <= 1 (zero outside)."""
    u = np.abs(np.asarray(u, dtype=float))
    w = np.zeros_like(u)
    inner = u <= 0.5
    outer = (u > 0.5) & (u <= 1.0)
    w[inner] = 1.0 - 6.0 * u[inner] ** 2 + 6.0 * u[inner] ** 3
    w[outer] = 2.0 * (1.0 - u[outer]) ** 3
    return w


def _check_series(x: TimeSeries):
    if len(x) < MIN_LENGTH:
        raise ValueError(
            f"series {x.id!r} too short for spectral estimation "
            f"(T={len(x)} < {MIN_LENGTH})"
        )


def _truncation_lag(bandwidth: float, n_samples: int) -> int:
    if not 0.0 < bandwidth < 0.5:
        raise ValueError(f"bandwidth must lie in (0, 1/2), got {bandwidth}")
    return max(1, min(n_samples - 1, int(round(LAG_CONSTANT / bandwidth))))


def periodogram(x: TimeSeries) -> SpectralDensity:
    """Raw periodogram of a time series on the positive Fourier grid.

    The series is mean-centered, then ``I(w_k) = |sum_t x_t e^{-i w_k t}|^2 / T``
    is evaluated at ``w_k = 2 pi k / T`` for ``k = 1..(T-1)//2``.  Summing the
    ordinates over the full symmetric grid and dividing by T recovers the
    sample variance (discrete Parseval identity).

    Parameters
    ----------
    x : TimeSeries
        Input series, length >= 8, finite samples.

    Returns
    -------
    SpectralDensity
        Unnormalized, unsmoothed ordinates.
    """
    _check_series(x)
    t_len = len(x)
    y = x.values - x.values.mean()
    spec = np.abs(np.fft.rfft(y)) ** 2 / t_len
    n = (t_len - 1) // 2
    return SpectralDensity(estimation_grid(t_len, x.fs), spec[1 : n + 1])


def _batched_autocov(rows: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased autocovariances up to `max_lag` for each centered row."""
    b, t_len = rows.shape
    nfft = 1 << int(np.ceil(np.log2(2 * t_len)))
    spec = np.abs(np.fft.rfft(rows, n=nfft, axis=1)) ** 2
    acov = np.fft.irfft(spec, n=nfft, axis=1)[:, : max_lag + 1] / t_len
    return acov


def _lag_window_values(rows: np.ndarray, bandwidth: float) -> np.ndarray:
    """Parzen lag-window spectral estimates for each row of a 2-d array.

    Rows are centered internally.  Returns ordinates on the positive Fourier
    grid of the row length, one row of outputs per row of inputs.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    b, t_len = rows.shape
    lag = _truncation_lag(bandwidth, t_len)
    rows = rows - rows.mean(axis=1, keepdims=True)
    acov = _batched_autocov(rows, lag)
    taper = parzen_window(np.arange(lag + 1) / lag)
    tapered = acov * taper

    # Assemble the symmetric lag sequence on the circular T-grid; folding
    # negative lags onto T-h is exact at the Fourier frequencies.
    seq = np.zeros((b, t_len))
    seq[:, 0] = tapered[:, 0]
    h = np.arange(1, lag + 1)
    np.add.at(seq, (slice(None), h % t_len), tapered[:, 1:])
    np.add.at(seq, (slice(None), (t_len - h) % t_len), tapered[:, 1:])
    est = np.fft.rfft(seq, axis=1).real

    n = (t_len - 1) // 2
    est = est[:, 1 : n + 1]
    floor = -1e-12 * max(1.0, float(est.max(initial=0.0)))
    if est.min(initial=0.0) < floor:
        raise AssertionError("lag-window estimate went negative beyond float noise")
    return np.clip(est, 0.0, None)


def smoothed_spectrum(x: TimeSeries, bandwidth: float | None = None) -> SpectralDensity:
    """Parzen lag-window estimate of the spectral density.

    Autocovariances up to lag ``L = round(LAG_CONSTANT / bandwidth)`` are
    tapered by the Parzen window and transformed; this equals the periodogram
    convolved with the (nonnegative) Parzen spectral window.  The output grid
    is identical to `periodogram`.

    Parameters
    ----------
    x : TimeSeries
        Input series, length >= 8.
    bandwidth : float, optional
        Dimensionless smoothing bandwidth in (0, 1/2).  Defaults to ``100/T``.

    Returns
    -------
    SpectralDensity
        Unnormalized smoothed ordinates with the bandwidth recorded.
    """
    _check_series(x)
    if bandwidth is None:
        bandwidth = default_bandwidth(len(x))
    values = _lag_window_values(x.values[None, :], bandwidth)[0]
    return SpectralDensity(
        estimation_grid(len(x), x.fs), values, normalized=False, bandwidth=bandwidth
    )


def normalize(f: SpectralDensity) -> SpectralDensity:
    """Rescale a density so its Riemann sum is one.

    Already-normalized inputs are returned unchanged, which makes the
    operation exactly idempotent.
    """
    if f.normalized:
        return f
    total = f.values.sum() * f.df
    if not total > 0.0:
        raise DegenerateSpectrumError(
            "cannot normalize an all-zero spectrum (zero-variance series)"
        )
    return SpectralDensity(f.freqs, f.values / total, normalized=True, bandwidth=f.bandwidth)


def concat_spectrum(
    xs: list[TimeSeries], bandwidth: float | None = None
) -> SpectralDensity:
    """Smoothed spectrum of the concatenation of several series.

    Each segment is mean-centered before joining, and the bandwidth defaults
    to ``100 / total_length``.  All series must share a sampling frequency.
    """
    if not xs:
        raise ValueError("need at least one series to concatenate")
    fs = xs[0].fs
    if any(x.fs != fs for x in xs):
        raise ValueError("cannot concatenate series with different sampling frequencies")
    for x in xs:
        _check_series(x)
    joined = np.concatenate([x.values - x.values.mean() for x in xs])
    glued = TimeSeries(joined, fs, id="+".join(x.id for x in xs))
    return smoothed_spectrum(glued, bandwidth)


def average_spectrum(
    densities: list[SpectralDensity], weights: list[float]
) -> SpectralDensity:
    """Pointwise convex combination of densities on a shared grid.

    Weights are normalized to sum to one.  If every input is normalized the
    result is renormalized to a unit Riemann sum.
    """
    if not densities:
        raise ValueError("need at least one density to average")
    if len(weights) != len(densities):
        raise ValueError("one weight per density required")
    w = np.asarray(weights, dtype=float)
    if w.min() < 0 or not w.sum() > 0:
        raise ValueError("weights must be nonnegative with positive sum")
    base = densities[0].freqs
    for d in densities[1:]:
        if d.freqs.size != base.size or not np.array_equal(d.freqs, base):
            raise ValueError("averaged densities must share an identical grid")
    w = w / w.sum()
    values = sum(wi * d.values for wi, d in zip(w, densities))
    out = SpectralDensity(base, values, normalized=False, bandwidth=densities[0].bandwidth)
    if all(d.normalized for d in densities):
        return normalize(out)
    return out


def _resample_values(f: SpectralDensity, target: np.ndarray) -> np.ndarray:
    # np.interp clamps to the end values outside the tabulated range.
    return np.interp(target, f.freqs, f.values)


def align_grids(
    f: SpectralDensity, g: SpectralDensity
) -> tuple[SpectralDensity, SpectralDensity]:
    """Bring two densities onto a common grid.

    Identical grids pass through untouched.  Otherwise the coarser-grid
    density is linearly interpolated onto the finer grid (end values
    extended), and both results are renormalized there when the inputs were
    normalized.
    """
    if f.freqs.size == g.freqs.size and np.array_equal(f.freqs, g.freqs):
        return f, g
    f_is_finer = f.df < g.df or (f.df == g.df and f.freqs.size >= g.freqs.size)
    fine, coarse = (f, g) if f_is_finer else (g, f)
    moved = SpectralDensity(
        fine.freqs,
        _resample_values(coarse, fine.freqs),
        normalized=False,
        bandwidth=coarse.bandwidth,
    )
    if coarse.normalized:
        moved = normalize(moved)
    kept = fine
    if fine.normalized:
        # Re-divide by the Riemann sum on this grid so unit mass holds exactly.
        kept = normalize(SpectralDensity(fine.freqs, fine.values, False, fine.bandwidth))
    return (kept, moved) if f_is_finer else (moved, kept)
