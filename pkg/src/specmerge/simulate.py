"""Synthetic series generators: AR(2) processes and mixtures, ocean-wave
spectra of the JONSWAP family, Gaussian synthesis from a target spectrum,
and white noise.

All generators are deterministic functions of their parameters and a 64-bit
seed; sub-streams are derived per `seeding.rng_for`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .seeding import rng_for
from .spectra import SpectralDensity, TimeSeries, estimation_grid

__all__ = [
    "Ar2Spec",
    "JonswapParams",
    "MixtureDesign",
    "ar2_coefficients",
    "ar2_from_coefficients",
    "ar2_spectral_density",
    "simulate_ar2",
    "simulate_mixture",
    "jonswap_spectrum",
    "simulate_from_spectrum",
    "simulate_white_noise",
]

GRAVITY = 9.81  # m/s^2


@dataclass(frozen=True)
class Ar2Spec:
    """AR(2) process parametrized by its spectral peak.

    `eta` is the peak frequency in Hertz, `magnitude` the modulus of the
    complex characteristic roots (must exceed 1 for causality; the peak
    sharpens as it approaches 1), `fs` the sampling frequency.
    """

    eta: float
    magnitude: float
    fs: float

    def __post_init__(self):
        if not self.magnitude > 1.0:
            raise ValueError("root magnitude must exceed 1 (causality)")
        if not 0.0 < self.eta < self.fs / 2.0:
            raise ValueError("peak frequency must lie in (0, fs/2)")


@dataclass(frozen=True)
class JonswapParams:
    """Significant wave height (m) and spectral peak period (s)."""

    hs: float
    tp: float

    def __post_init__(self):
        if not (self.hs > 0 and self.tp > 0):
            raise ValueError("wave height and peak period must be positive")


@dataclass(frozen=True)
class MixtureDesign:
    """Observed series as loadings applied to latent AR(2) processes.

    Row ``i`` of `loadings` defines one cluster: each of its `replicates`
    series is an independent draw of ``sum_j loadings[i, j] * Z_j + noise``
    with fresh latents ``Z_j`` and fresh Gaussian noise per series.
    """

    latents: tuple[Ar2Spec, ...]
    loadings: np.ndarray
    noise_sd: float = 1.0
    replicates: int = 1

    def __post_init__(self):
        lat = tuple(self.latents)
        load = np.asarray(self.loadings, dtype=float)
        if load.ndim != 2 or load.shape[1] != len(lat):
            raise ValueError("loadings must be a K x n_latents matrix")
        if load.min() < 0:
            raise ValueError("loadings must be nonnegative")
        if np.any(load.sum(axis=1) == 0):
            raise ValueError("every loading row needs at least one nonzero entry")
        if len({s.fs for s in lat}) != 1:
            raise ValueError("all latent processes must share one sampling frequency")
        if not self.noise_sd >= 0:
            raise ValueError("noise standard deviation must be nonnegative")
        if self.replicates < 1:
            raise ValueError("replicates must be positive")
        load = load.copy()
        load.flags.writeable = False
        object.__setattr__(self, "latents", lat)
        object.__setattr__(self, "loadings", load)

    @property
    def fs(self) -> float:
        return self.latents[0].fs

    @property
    def n_clusters(self) -> int:
        return self.loadings.shape[0]


def ar2_coefficients(spec: Ar2Spec) -> tuple[float, float]:
    """Recursion coefficients whose characteristic roots have modulus
    `magnitude` and argument ``2 pi eta / fs``."""
    w0 = 2.0 * np.pi * spec.eta / spec.fs
    return 2.0 * np.cos(w0) / spec.magnitude, -1.0 / spec.magnitude**2


def ar2_from_coefficients(phi1: float, phi2: float, fs: float) -> Ar2Spec:
    """Invert `ar2_coefficients` by solving the characteristic polynomial."""
    roots = np.roots([-phi2, -phi1, 1.0])
    if np.all(np.isreal(roots)):
        raise ValueError("coefficients yield real roots; no spectral peak frequency")
    root = roots[np.argmax(roots.imag)]
    magnitude = float(np.abs(root))
    eta = float(np.angle(root) * fs / (2.0 * np.pi))
    return Ar2Spec(eta=eta, magnitude=magnitude, fs=fs)


def ar2_spectral_density(spec: Ar2Spec, freqs=None) -> SpectralDensity:
    """Closed-form one-sided spectral density of the AR(2) process with unit
    innovation variance, tabulated on `freqs` (Hertz)."""
    if freqs is None:
        freqs = estimation_grid(2048, spec.fs)
    freqs = np.asarray(freqs, dtype=float)
    phi1, phi2 = ar2_coefficients(spec)
    z = np.exp(-2j * np.pi * freqs / spec.fs)
    transfer = 1.0 - phi1 * z - phi2 * z**2
    values = 2.0 / (spec.fs * np.abs(transfer) ** 2)
    return SpectralDensity(freqs, values)


def _ar2_burn_in(spec: Ar2Spec) -> int:
    # Mixing slows as the roots approach the unit circle.
    return int(np.ceil(10.0 * spec.magnitude / (spec.magnitude - 1.0)))


def _ar2_from_rng(spec: Ar2Spec, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    phi1, phi2 = ar2_coefficients(spec)
    burn = _ar2_burn_in(spec)
    innovations = rng.standard_normal(n_samples + burn)
    z = lfilter([1.0], [1.0, -phi1, -phi2], innovations)
    return z[burn:]


def simulate_ar2(spec: Ar2Spec, n_samples: int, seed: int) -> TimeSeries:
    """Simulate an AR(2) path with unit-variance Gaussian innovations.

    The recursion starts at zero and a burn-in of ``10 M / (M - 1)`` samples
    is discarded before the returned stretch.
    """
    if n_samples < 8:
        raise ValueError("need at least 8 samples")
    values = _ar2_from_rng(spec, n_samples, rng_for(seed))
    return TimeSeries(values, spec.fs, id=f"ar2-{spec.eta:g}")


def simulate_mixture(
    design: MixtureDesign, n_samples: int, seed: int
) -> list[TimeSeries]:
    """Simulate all series of a mixture design.

    The series for cluster row ``i``, replicate ``r`` uses the derived
    streams ``rng_for(seed, i, r, j)`` for latent ``j`` (drawn only where the
    loading is nonzero) and ``rng_for(seed, i, r, n_latents)`` for the added
    noise, so every series is an independent realization.  Ids are
    ``"g{i}-{r}"`` and record the generating row.
    """
    out = []
    n_lat = len(design.latents)
    for i in range(design.n_clusters):
        for r in range(design.replicates):
            x = np.zeros(n_samples)
            for j, latent in enumerate(design.latents):
                coeff = design.loadings[i, j]
                if coeff == 0.0:
                    continue
                x = x + coeff * _ar2_from_rng(latent, n_samples, rng_for(seed, i, r, j))
            if design.noise_sd > 0:
                x = x + design.noise_sd * rng_for(seed, i, r, n_lat).standard_normal(
                    n_samples
                )
            out.append(TimeSeries(x, design.fs, id=f"g{i}-{r}"))
    return out


def jonswap_peak_enhancement(p: JonswapParams) -> float:
    """Peak-enhancement factor gamma as a function of (Hs, Tp)."""
    ratio = p.tp / np.sqrt(p.hs)
    return float(
        np.exp(3.484 * (1.0 - 0.1975 * (0.036 - 0.0056 * ratio) * p.tp**4 / p.hs**2))
    )


def jonswap_spectrum(p: JonswapParams, omega) -> SpectralDensity:
    """JONSWAP spectral density tabulated on a grid of positive angular
    frequencies (rad/s).

    The spectral width parameter is 0.07 below the peak frequency
    ``omega_p = pi / Tp`` and 0.09 above it.  The curve is rescaled so that
    four times the square root of its integral equals Hs exactly, matching
    the definition of significant wave height.  The returned density is
    expressed in Hertz (``freq = omega / 2 pi``) with its integral preserved.
    """
    omega = np.asarray(omega, dtype=float)
    if omega.ndim != 1 or omega.size < 2 or omega.min() <= 0:
        raise ValueError("need a 1-d grid of positive angular frequencies")
    omega_p = np.pi / p.tp
    gamma = jonswap_peak_enhancement(p)
    s = np.where(omega <= omega_p, 0.07, 0.09)
    peak_arg = np.exp(-((omega - omega_p) ** 2) / (2.0 * omega_p**2 * s**2))
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        tail = np.exp(-1.25 * (omega_p / omega) ** 4)
        values = np.where(
            tail > 0.0, GRAVITY**2 / omega**5 * tail * gamma**peak_arg, 0.0
        )
    values = np.nan_to_num(values, nan=0.0, posinf=0.0)
    d_omega = omega[1] - omega[0]
    total = values.sum() * d_omega
    if not total > 0:
        raise ValueError("JONSWAP spectrum vanishes on the supplied grid")
    values = values * ((p.hs / 4.0) ** 2 / total)
    return SpectralDensity(omega / (2.0 * np.pi), values * 2.0 * np.pi)


def simulate_from_spectrum(
    f: SpectralDensity, n_samples: int, fs: float, seed: int
) -> TimeSeries:
    """Stationary Gaussian-type series with target spectrum `f`.

    Random-phase cosine synthesis on the length-T Fourier grid:
    ``X(t) = sum_k sqrt(2 S(v_k) dv) cos(2 pi v_k t / fs + U_k)`` with
    independent uniform phases, evaluated through an inverse FFT.  The target
    is linearly interpolated onto the synthesis grid (zero outside its
    tabulated support), so the sample variance approaches the integral of S.
    """
    if n_samples < 8:
        raise ValueError("need at least 8 samples")
    grid = estimation_grid(n_samples, fs)
    power = np.interp(grid, f.freqs, f.values, left=0.0, right=0.0)
    if not power.sum() > 0:
        raise ValueError("target spectrum has no mass on the synthesis grid")
    amplitude = np.sqrt(2.0 * power * (fs / n_samples))
    phases = rng_for(seed).uniform(0.0, 2.0 * np.pi, grid.size)
    coeffs = np.zeros(n_samples // 2 + 1, dtype=complex)
    coeffs[1 : grid.size + 1] = amplitude * np.exp(1j * phases)
    values = np.fft.irfft(coeffs, n=n_samples) * (n_samples / 2.0)
    return TimeSeries(values, fs, id="synth")


def simulate_white_noise(n_samples: int, seed: int, fs: float = 1.0) -> TimeSeries:
    """Standard Gaussian white noise, deterministic per seed."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    return TimeSeries(rng_for(seed).standard_normal(n_samples), fs, id="wn")
