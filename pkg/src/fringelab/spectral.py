"""Discrete Fourier analysis of wavenumber-domain fringes.

The transform of a uniform wavenumber grid has its frequency axis in nm:
bin m of an N-point transform sits at m / (N * delta_sigma), which for
thin-film fringes reads directly as effective optical thickness. The
forward transform applies no normalization (plain summation), so
sum |X|^2 over a full transform equals N times the input energy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import ZoomFFT

from .errors import NoFringePeakError, PeakMeasurementError

MIN_TRANSFORM_POINTS = 16

# Below this padded length the full transform is cheap enough to run outright.
_ZOOM_THRESHOLD = 2**17

DEFAULT_LOW_CUTOFF_NM = 1000.0


@dataclass(frozen=True)
class FrequencySpectrum:
    """Complex amplitudes on a uniformly spaced, ascending frequency axis."""

    frequencies_nm: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies_nm, dtype=float)
        a = np.asarray(self.amplitudes, dtype=complex)
        if f.ndim != 1 or a.ndim != 1 or f.size != a.size:
            raise ValueError("frequencies and amplitudes must be 1-d and equally long")
        if f.size < 3:
            raise ValueError("need at least three frequency bins")
        object.__setattr__(self, "frequencies_nm", f)
        object.__setattr__(self, "amplitudes", a)

    @property
    def bin_spacing_nm(self) -> float:
        return float(self.frequencies_nm[1] - self.frequencies_nm[0])


@dataclass(frozen=True)
class PeakInfo:
    """Location, width, and power of a spectral peak."""

    center_frequency_nm: float
    fwhm_nm: float
    peak_power: float


def dft(values, delta_sigma: float) -> FrequencySpectrum:
    """Forward transform of real wavenumber-domain samples.

    Returns the non-negative-frequency half; bin m maps to
    m / (len(values) * delta_sigma) nm.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < MIN_TRANSFORM_POINTS:
        raise ValueError(f"need a 1-d array of at least {MIN_TRANSFORM_POINTS} samples")
    if delta_sigma <= 0.0:
        raise ValueError("delta_sigma must be positive")
    amplitudes = np.fft.rfft(v)
    frequencies = np.arange(amplitudes.size) * (1.0 / (v.size * delta_sigma))
    return FrequencySpectrum(frequencies, amplitudes)


def _measure_peak(spectrum: FrequencySpectrum, low_cutoff_nm: float, refine: bool) -> PeakInfo:
    """Shared peak search: argmax above cutoff, local-max shape check, FWHM."""
    freqs = spectrum.frequencies_nm
    mags = np.abs(spectrum.amplitudes)
    allowed = np.flatnonzero(freqs > low_cutoff_nm)
    if allowed.size == 0:
        raise NoFringePeakError(
            f"no transform bins above the {low_cutoff_nm:g} nm cutoff"
        )
    peak = allowed[int(np.argmax(mags[allowed]))]
    last = mags.size - 1
    is_local_max = (
        0 < peak < last
        and mags[peak] > 0.0
        and mags[peak] >= mags[peak - 1]
        and mags[peak] >= mags[peak + 1]
        and (mags[peak] > mags[peak - 1] or mags[peak] > mags[peak + 1])
    )
    if not is_local_max:
        raise NoFringePeakError(
            "no fringe peak: largest magnitude above the cutoff is not a local maximum"
        )

    half = 0.5 * mags[peak]

    def crossing(direction: int) -> float:
        j = peak
        while 0 <= j + direction <= last:
            k = j + direction
            if mags[k] <= half:
                # Linear interpolation between bins j and k on magnitude.
                frac = (half - mags[j]) / (mags[k] - mags[j])
                return float(freqs[j] + frac * (freqs[k] - freqs[j]))
            j = k
        raise PeakMeasurementError("half-maximum crossing ran off the spectrum")

    left = crossing(-1)
    right = crossing(+1)

    center = float(freqs[peak])
    if refine:
        m_l, m_c, m_r = mags[peak - 1], mags[peak], mags[peak + 1]
        denom = m_l - 2.0 * m_c + m_r
        if denom != 0.0:
            shift = 0.5 * (m_l - m_r) / denom
            center += shift * spectrum.bin_spacing_nm

    return PeakInfo(
        center_frequency_nm=center,
        fwhm_nm=right - left,
        peak_power=float(mags[peak] ** 2),
    )


def dominant_peak(
    spectrum: FrequencySpectrum,
    low_cutoff_nm: float = DEFAULT_LOW_CUTOFF_NM,
    refine: bool = False,
) -> PeakInfo:
    """Largest-magnitude local maximum above the low-frequency cutoff.

    The full width at half maximum is measured on magnitude (not power) by
    linear interpolation around the peak. With refine=True the center gets
    a parabolic sub-bin adjustment; by default it is the bin frequency.
    """
    return _measure_peak(spectrum, low_cutoff_nm, refine)


def _next_pow2(n: int) -> int:
    out = 1
    while out < n:
        out *= 2
    return out


def _full_padded_peak(values, delta_sigma, pad_length, low_cutoff_nm, refine) -> PeakInfo:
    v = np.asarray(values, dtype=float)
    amplitudes = np.fft.rfft(v, n=pad_length)
    frequencies = np.arange(amplitudes.size) * (1.0 / (pad_length * delta_sigma))
    return _measure_peak(FrequencySpectrum(frequencies, amplitudes), low_cutoff_nm, refine)


def padded_peak(
    values,
    delta_sigma: float,
    pad_length: int,
    low_cutoff_nm: float = DEFAULT_LOW_CUTOFF_NM,
    refine: bool = False,
) -> PeakInfo:
    """Dominant peak of the zero-padded transform, without materializing it.

    Numerically equivalent to dft(zero_pad(values, pad_length), ...) followed
    by dominant_peak: a coarse transform localizes the peak (zero-padding
    adds no information, so the coarse grid already resolves every feature),
    then a chirp-z zoom evaluates the exact padded-transform bins around it.
    Any ambiguity near window edges falls back to the full transform.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < MIN_TRANSFORM_POINTS:
        raise ValueError(f"need a 1-d array of at least {MIN_TRANSFORM_POINTS} samples")
    if delta_sigma <= 0.0:
        raise ValueError("delta_sigma must be positive")
    if pad_length < v.size:
        raise ValueError("pad_length shorter than the data")
    if pad_length <= _ZOOM_THRESHOLD:
        return _full_padded_peak(v, delta_sigma, pad_length, low_cutoff_nm, refine)

    coarse_len = min(pad_length, max(2**15, _next_pow2(8 * v.size)))
    coarse_amps = np.fft.rfft(v, n=coarse_len)
    coarse_freqs = np.arange(coarse_amps.size) * (1.0 / (coarse_len * delta_sigma))
    try:
        coarse = _measure_peak(
            FrequencySpectrum(coarse_freqs, coarse_amps), low_cutoff_nm, False
        )
    except (NoFringePeakError, PeakMeasurementError):
        # Genuinely ambiguous shape; decide on the full transform.
        return _full_padded_peak(v, delta_sigma, pad_length, low_cutoff_nm, refine)

    # Window wide enough to contain the peak and both half-max crossings:
    # the data's resolution limit is 1/(n*delta_sigma), and no mainlobe or
    # crossing sits farther than a few resolution bins from the peak.
    resolution = 1.0 / (v.size * delta_sigma)
    half_window = 4.0 * resolution + coarse.fwhm_nm
    fs = 1.0 / delta_sigma
    half_bins = pad_length // 2
    m_lo = max(int(np.floor((coarse.center_frequency_nm - half_window) * pad_length * delta_sigma)), 0)
    m_hi = min(int(np.ceil((coarse.center_frequency_nm + half_window) * pad_length * delta_sigma)), half_bins)
    count = m_hi - m_lo + 1
    if count < 16:
        return _full_padded_peak(v, delta_sigma, pad_length, low_cutoff_nm, refine)

    transform = ZoomFFT(v.size, [m_lo * fs / pad_length, (m_lo + count) * fs / pad_length], count, fs=fs)
    zoom_amps = transform(v)
    zoom_freqs = (m_lo + np.arange(count)) * (1.0 / (pad_length * delta_sigma))
    try:
        info = _measure_peak(FrequencySpectrum(zoom_freqs, zoom_amps), low_cutoff_nm, refine)
    except (NoFringePeakError, PeakMeasurementError):
        return _full_padded_peak(v, delta_sigma, pad_length, low_cutoff_nm, refine)

    # Distrust results hugging a zoom edge that is not a true spectrum edge.
    margin = 2.0 * info.fwhm_nm
    near_left = info.center_frequency_nm - margin < zoom_freqs[0]
    near_right = info.center_frequency_nm + margin > zoom_freqs[-1]
    if (near_left and m_lo > 0) or (near_right and m_hi < half_bins):
        return _full_padded_peak(v, delta_sigma, pad_length, low_cutoff_nm, refine)
    return info
