"""Fringe phase extraction with a complex Morlet band-pass filter.

A spectrum is resampled linearly onto a uniform wavenumber grid and its
dominant fringe frequency located on the zero-padded transform (no window;
windowing would broaden the peak that sizes the filter). A complex Morlet
wavelet matched to that peak isolates the fringe band; the filtered
signal's unwrapped, cycle-anchored phase is averaged against a reference
to give a sub-fringe measure of optical-thickness change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import DegenerateAmplitudeError
from .filmsim import Spectrum
from .spectral import DEFAULT_LOW_CUTOFF_NM, PeakInfo, padded_peak
from .wavegrid import (
    DEFAULT_GRID_POINTS,
    DEFAULT_RANGE_NM,
    ResampledSpectrum,
    WavenumberGrid,
    default_pad_length,
    to_wavenumber,
)

# Envelope support: samples span +/- this many envelope sigmas.
ENVELOPE_HALF_WIDTH_SIGMAS = 4.0

# Phase is meaningless where the filtered amplitude underflows.
AMPLITUDE_FLOOR = 1e-12

_FWHM_TO_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class LampConfig:
    range_nm: tuple[float, float] = DEFAULT_RANGE_NM
    n_points: int = DEFAULT_GRID_POINTS
    pad_exponent: int | None = None
    low_cutoff_nm: float = DEFAULT_LOW_CUTOFF_NM
    # Scales the filter bandwidth relative to the measured peak width.
    wavelet_width_scale: float = 1.0
    # Fraction of grid points dropped from each end before averaging.
    edge_trim_fraction: float = 0.0
    # Design the filter once from the reference instead of per spectrum.
    reuse_reference_wavelet: bool = False

    def __post_init__(self):
        if self.pad_exponent is not None and 2**self.pad_exponent < self.n_points:
            raise ValueError("pad_exponent smaller than the resampled length")
        if not self.wavelet_width_scale > 0.0:
            raise ValueError("wavelet_width_scale must be positive")
        if not 0.0 <= self.edge_trim_fraction <= 0.4:
            raise ValueError("edge_trim_fraction must lie in [0, 0.4]")


@dataclass(frozen=True)
class MorletWavelet:
    """Complex exponential under a Gaussian envelope, unit energy."""

    center_frequency_nm: float
    envelope_sigma: float  # Gaussian std in wavenumber units
    spacing: float  # sample spacing, matches the target grid
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 1 or s.size % 2 != 1:
            raise ValueError("wavelet samples must be 1-d with an odd count")
        object.__setattr__(self, "samples", s)


@dataclass(frozen=True)
class FilteredSpectrum:
    """Complex band-passed fringes on the resampled grid."""

    grid: WavenumberGrid
    complex_values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.complex_values, dtype=complex)
        if v.ndim != 1 or v.size != self.grid.n_points:
            raise ValueError("complex_values must match the grid length")
        object.__setattr__(self, "complex_values", v)

    @property
    def phase(self) -> np.ndarray:
        """Wrapped phase in (-pi, pi]."""
        return np.angle(self.complex_values)

    @property
    def amplitude(self) -> np.ndarray:
        return np.abs(self.complex_values)


def design_wavelet(
    peak: PeakInfo, delta_sigma: float, width_scale: float = 1.0
) -> MorletWavelet:
    """Morlet wavelet matched to a measured fringe peak.

    The envelope is sized so the wavelet's frequency-domain FWHM equals
    width_scale times the peak's measured FWHM; samples are spaced like
    the grid the filter will run on and normalized to unit energy.
    """
    if delta_sigma <= 0.0:
        raise ValueError("delta_sigma must be positive")
    if peak.fwhm_nm <= 0.0 or width_scale <= 0.0:
        raise ValueError("peak FWHM and width_scale must be positive")
    fwhm_f = width_scale * peak.fwhm_nm
    sigma = _FWHM_TO_SIGMA / (2.0 * math.pi * fwhm_f)
    half_count = int(math.floor(ENVELOPE_HALF_WIDTH_SIGMAS * sigma / delta_sigma))
    if half_count < 1:
        raise ValueError("grid too coarse to sample the wavelet envelope")
    offsets = np.arange(-half_count, half_count + 1) * delta_sigma
    samples = np.exp(1j * 2.0 * math.pi * peak.center_frequency_nm * offsets)
    samples = samples * np.exp(-(offsets**2) / (2.0 * sigma**2))
    energy = np.sum(np.abs(samples) ** 2) * delta_sigma
    samples = samples / math.sqrt(energy)
    return MorletWavelet(
        center_frequency_nm=peak.center_frequency_nm,
        envelope_sigma=sigma,
        spacing=delta_sigma,
        samples=samples,
    )


def filter_spectrum(resampled: ResampledSpectrum, wavelet: MorletWavelet) -> FilteredSpectrum:
    """Convolve the resampled fringes with the wavelet ("same" alignment).

    The data is zero-extended beyond its ends, so amplitude decays near
    the edges. The wavelet must have been designed for this grid's spacing.
    """
    spacing = resampled.grid.delta_sigma
    if not math.isclose(wavelet.spacing, spacing, rel_tol=1e-9, abs_tol=0.0):
        raise ValueError("wavelet sample spacing does not match the grid")
    filtered = fftconvolve(resampled.values, wavelet.samples, mode="same") * spacing
    return FilteredSpectrum(resampled.grid, filtered)


def normalize_fringes(filtered: FilteredSpectrum) -> np.ndarray:
    """Unit-amplitude fringes cos(phase), i.e. real part over amplitude."""
    amplitude = filtered.amplitude
    if np.any(amplitude < AMPLITUDE_FLOOR):
        raise DegenerateAmplitudeError(
            f"filtered amplitude below {AMPLITUDE_FLOOR:g}; phase undefined"
        )
    return filtered.complex_values.real / amplitude


def unwrap_phase(wrapped) -> np.ndarray:
    """Unwrap by 2*pi steps so successive differences stay within (-pi, pi].

    The first element is returned unchanged.
    """
    w = np.asarray(wrapped, dtype=float)
    if w.ndim != 1 or w.size < 2:
        raise ValueError("need a 1-d array of at least two phases")
    return np.unwrap(w)


def anchor_cycle(unwrapped: np.ndarray, coarse_eot_nm: float, sigma_min: float) -> np.ndarray:
    """Shift an unwrapped profile by whole cycles to match a coarse estimate.

    Unwrapping fixes only phase differences; the absolute cycle count comes
    from the transform-peak estimate: the profile is offset by the integer
    number of cycles that brings its first sample closest to
    2*pi*coarse_eot_nm*sigma_min.
    """
    u = np.asarray(unwrapped, dtype=float)
    two_pi = 2.0 * math.pi
    cycles = round((two_pi * coarse_eot_nm * sigma_min - u[0]) / two_pi)
    return u + two_pi * cycles


def _remove_baseline(grid: WavenumberGrid, values: np.ndarray) -> np.ndarray:
    """Subtract a quadratic least-squares baseline from resampled values.

    The fringe carrier rides on a slowly varying pedestal: the film's mean
    reflectance plus any broadband drift. Left in place, the pedestal's
    transform tail would hide the fringe peak, and its step response at the
    data edges would leak through the band-pass filter and bias the phase.
    A quadratic absorbs smooth wavelength-domain drifts, which map through
    1/lambda to near-parabolic trends on the wavenumber grid, while the
    fringe carrier (several cycles across the grid) is left intact.
    """
    half_span = (grid.sigma_max - grid.sigma_min) / 2.0
    u = (grid.sigmas() - grid.mean_sigma) / half_span
    coeffs = np.polyfit(u, values, 2)
    return values - np.polyval(coeffs, u)


def _phase_profile(
    spectrum: Spectrum, cfg: LampConfig, wavelet: MorletWavelet | None = None
) -> tuple[np.ndarray, WavenumberGrid, PeakInfo, MorletWavelet]:
    resampled = to_wavenumber(spectrum, cfg.range_nm, cfg.n_points, method="linear")
    delta_sigma = resampled.grid.delta_sigma
    if cfg.pad_exponent is not None:
        pad = 2**cfg.pad_exponent
    else:
        pad = default_pad_length(delta_sigma)
    centered = ResampledSpectrum(
        resampled.grid, _remove_baseline(resampled.grid, resampled.values)
    )
    peak = padded_peak(centered.values, delta_sigma, pad, low_cutoff_nm=cfg.low_cutoff_nm)
    if wavelet is None:
        wavelet = design_wavelet(peak, delta_sigma, cfg.wavelet_width_scale)
    filtered = filter_spectrum(centered, wavelet)
    amplitude = filtered.amplitude
    if np.any(amplitude < AMPLITUDE_FLOOR):
        raise DegenerateAmplitudeError("filtered amplitude collapsed; phase undefined")
    unwrapped = unwrap_phase(np.angle(filtered.complex_values))
    anchored = anchor_cycle(unwrapped, peak.center_frequency_nm, resampled.grid.sigma_min)
    return anchored, resampled.grid, peak, wavelet


def lamp_signal(reference: Spectrum, analyte: Spectrum, cfg: LampConfig = LampConfig()) -> float:
    """Mean anchored-phase difference (analyte minus reference), in radians.

    Positive when the analyte's optical thickness exceeds the reference's.
    Each spectrum gets its own matched wavelet unless the config says to
    reuse the reference's design.
    """
    ref_phase, grid, _, ref_wavelet = _phase_profile(reference, cfg)
    shared = ref_wavelet if cfg.reuse_reference_wavelet else None
    ana_phase, _, _, _ = _phase_profile(analyte, cfg, wavelet=shared)
    diff = ana_phase - ref_phase
    trim = int(math.floor(cfg.edge_trim_fraction * diff.size))
    if trim > 0:
        diff = diff[trim : diff.size - trim]
    return float(diff.mean())


def lamp_to_delta_eot(mean_phase_difference: float, grid: WavenumberGrid) -> float:
    """Convert a mean phase difference to an optical-thickness change (nm)."""
    return mean_phase_difference / (2.0 * math.pi * grid.mean_sigma)
