"""Monte-Carlo limit-of-detection studies for the fringe estimators.

A study generates many noisy analyte spectra against one noiseless
reference, runs a chosen estimator on each, and reduces the per-trial
signals to distribution statistics. Detection limits follow the
blank-versus-shifted construction: LOD = 3.3 (sigma_blank + delta_g) / slope,
where delta_g charges any systematic drift penalty and the slope converts
signal units to refractive index units from a small calibration shift.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CalibrationError, StudyError
from .filmsim import (
    FilmStack,
    NoiseModel,
    Spectrum,
    add_noise,
    calibrate_ramp_magnitude,
    simulate_reflectance,
    white_sigma_for_target,
)
from .lamp import LampConfig, lamp_signal
from .legacy import IawConfig, RiftsConfig, iaw, rifts_eot

METHODS = ("rifts", "iaw", "lamp")
GRADIENTS = ("none", "offset", "amplitude")

# Pinned signal-to-noise floors once each drift ramp is included.
OFFSET_GRADIENT_SNR_DB = 7.9
AMPLITUDE_GRADIENT_SNR_DB = 7.7

MAX_FAILURE_FRACTION = 0.01
LINEARITY_TOLERANCE = 0.10
MIN_REPORTED_TRIALS = 100


@dataclass(frozen=True)
class DistributionStats:
    """Sample mean and standard deviation of per-trial method signals."""

    mean: float
    std: float
    n_trials: int

    def __post_init__(self):
        if self.n_trials < 2:
            raise ValueError("need at least two trials for a distribution")
        if not self.std >= 0.0:
            raise ValueError("standard deviation must be non-negative")


@dataclass(frozen=True)
class LodResult:
    sigma_blank: float
    delta_g: float
    slope: float
    lod_riu: float
    linearity_ratio: float

    def __post_init__(self):
        if min(self.sigma_blank, self.delta_g, self.slope, self.lod_riu) < 0:
            raise ValueError("detection-limit components must be non-negative")


@dataclass(frozen=True)
class LodStudyConfig:
    """Inputs for one Monte-Carlo detection-limit study.

    The noise model supplies the white level (explicit sigma or an
    S/N target resolved once against the clean reference) and the master
    seed; drift ramps are owned by the study and calibrated to the
    configured gradient S/N floors, so the model itself must not carry
    ramp terms. A floor of None disables that ramp (magnitude 0). Trial i
    draws from a stream derived from (seed, i), making trials
    order-independent.
    """

    stack: FilmStack = field(default_factory=FilmStack)
    noise: NoiseModel = field(default_factory=lambda: NoiseModel(target_snr_db=27.7, seed=0))
    native_range_nm: tuple = (500.0, 800.0)
    native_points: int = 768
    n_trials: int = 1000
    calibration_delta_n: float = 1e-3
    method: str = "lamp"
    offset_snr_db: float | None = OFFSET_GRADIENT_SNR_DB
    amplitude_snr_db: float | None = AMPLITUDE_GRADIENT_SNR_DB
    strict_linearity: bool = False
    rifts: RiftsConfig = field(default_factory=RiftsConfig)
    iaw: IawConfig = field(default_factory=IawConfig)
    lamp: LampConfig = field(default_factory=LampConfig)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.n_trials < 2:
            raise ValueError("n_trials must be at least 2")
        if not self.calibration_delta_n > 0:
            raise ValueError("calibration_delta_n must be positive")
        if self.native_points < 16:
            raise ValueError("native grid needs at least 16 samples")
        lo, hi = self.native_range_nm
        if not 0 < lo < hi:
            raise ValueError("native range must satisfy 0 < low < high")
        if self.noise.offset_ramp_magnitude != 0.0 or self.noise.amplitude_ramp_gain != 0.0:
            raise ValueError(
                "drift ramps are applied by the study itself; "
                "configure gradient S/N floors instead of ramp magnitudes"
            )

    def wavelengths(self) -> np.ndarray:
        lo, hi = self.native_range_nm
        return np.linspace(lo, hi, self.native_points)


def _trial_seed(master_seed: int, index: int) -> int:
    return int(np.random.SeedSequence((master_seed, index)).generate_state(1, np.uint64)[0])


class _StudyEngine:
    """Shared per-study state: clean spectra, resolved noise, calibrated ramps."""

    def __init__(self, cfg: LodStudyConfig):
        self.cfg = cfg
        self.reference = simulate_reflectance(cfg.stack, cfg.wavelengths())
        if cfg.noise.gaussian_sigma is not None:
            self.white_sigma = cfg.noise.gaussian_sigma
        else:
            self.white_sigma = white_sigma_for_target(self.reference, cfg.noise.target_snr_db)
        self._clean_cache: dict[float, Spectrum] = {}
        self._ramp_cache: dict[str, float] = {}
        self._dist_cache: dict[tuple, DistributionStats] = {}

    def clean_analyte(self, delta_n: float) -> Spectrum:
        if delta_n not in self._clean_cache:
            stack = self.cfg.stack.with_film_index_shift(delta_n)
            self._clean_cache[delta_n] = simulate_reflectance(stack, self.cfg.wavelengths())
        return self._clean_cache[delta_n]

    def ramp_magnitude(self, gradient: str) -> float:
        if gradient == "none":
            return 0.0
        target = (self.cfg.offset_snr_db if gradient == "offset"
                  else self.cfg.amplitude_snr_db)
        if target is None:
            return 0.0
        if gradient not in self._ramp_cache:
            self._ramp_cache[gradient] = calibrate_ramp_magnitude(
                self.reference, gradient, target, white_sigma=self.white_sigma)
        return self._ramp_cache[gradient]

    def _trial_model(self, gradient: str, index: int) -> NoiseModel:
        magnitude = self.ramp_magnitude(gradient)
        return NoiseModel(
            gaussian_sigma=self.white_sigma,
            offset_ramp_magnitude=magnitude if gradient == "offset" else 0.0,
            amplitude_ramp_gain=magnitude if gradient == "amplitude" else 0.0,
            seed=_trial_seed(self.cfg.noise.seed, index),
        )

    def _evaluate(self, noisy: Spectrum) -> float:
        cfg = self.cfg
        if cfg.method == "rifts":
            return rifts_eot(noisy, cfg.rifts)
        if cfg.method == "iaw":
            return iaw(self.reference, noisy, cfg.iaw)
        return lamp_signal(self.reference, noisy, cfg.lamp)

    def distribution(self, delta_n: float, gradient: str) -> DistributionStats:
        key = (self.cfg.method, delta_n, gradient)
        if key in self._dist_cache:
            return self._dist_cache[key]
        clean = self.clean_analyte(delta_n)
        signals = []
        errors: list[str] = []
        for i in range(self.cfg.n_trials):
            noisy = add_noise(clean, self._trial_model(gradient, i))
            try:
                signals.append(self._evaluate(noisy))
            except Exception as exc:  # noqa: BLE001 - per-trial diagnostics
                errors.append(f"trial {i}: {exc}")
        if len(errors) > MAX_FAILURE_FRACTION * self.cfg.n_trials:
            raise StudyError(
                f"{len(errors)} of {self.cfg.n_trials} trials failed "
                f"({self.cfg.method}, delta_n={delta_n:g}, gradient={gradient}); "
                f"first failure: {errors[0]}"
            )
        values = np.asarray(signals)
        stats = DistributionStats(
            mean=float(values.mean()),
            std=float(values.std(ddof=1)),
            n_trials=values.size,
        )
        self._dist_cache[key] = stats
        return stats


def response_distribution(
    cfg: LodStudyConfig, delta_n: float, gradient: str = "none"
) -> DistributionStats:
    """Distribution of the configured method's signal over noisy trials."""
    if gradient not in GRADIENTS:
        raise ValueError(f"gradient must be one of {GRADIENTS}")
    return _StudyEngine(cfg).distribution(delta_n, gradient)


def gradient_delta(cfg: LodStudyConfig, gradient: str, engine: _StudyEngine | None = None) -> float:
    """Drift penalty: shift of the blank mean when the ramp is switched on.

    Trials are paired (same derived seeds with and without the ramp), so
    the white-noise contribution cancels from the comparison.
    """
    if gradient not in ("offset", "amplitude"):
        raise ValueError("gradient must be 'offset' or 'amplitude'")
    engine = engine if engine is not None else _StudyEngine(cfg)
    with_ramp = engine.distribution(0.0, gradient)
    without = engine.distribution(0.0, "none")
    return abs(with_ramp.mean - without.mean)


def _lod_from_engine(engine: _StudyEngine, gradient: str) -> LodResult:
    cfg = engine.cfg
    blank = engine.distribution(0.0, "none")
    shifted = engine.distribution(cfg.calibration_delta_n, "none")
    slope = (shifted.mean - blank.mean) / cfg.calibration_delta_n
    if slope <= 0:
        raise CalibrationError(
            f"{cfg.method} signal did not respond to the calibration shift "
            f"(slope {slope:g})"
        )
    half = engine.distribution(cfg.calibration_delta_n / 2.0, "none")
    half_slope = (half.mean - blank.mean) / (cfg.calibration_delta_n / 2.0)
    ratio = half_slope / slope
    if abs(ratio - 1.0) > LINEARITY_TOLERANCE:
        message = (
            f"{cfg.method} response is not linear near the calibration point: "
            f"slope at delta_n/2 differs by {100 * abs(ratio - 1):.1f}%"
        )
        if cfg.strict_linearity:
            raise CalibrationError(message)
        warnings.warn(message, stacklevel=2)
    delta_g = 0.0 if gradient == "none" else gradient_delta(cfg, gradient, engine)
    lod = 3.3 * (blank.std + delta_g) / slope
    return LodResult(
        sigma_blank=blank.std,
        delta_g=delta_g,
        slope=slope,
        lod_riu=lod,
        linearity_ratio=ratio,
    )


def lod_riu(cfg: LodStudyConfig, gradient: str = "none") -> LodResult:
    """Detection limit in refractive index units for one method and drift case."""
    if gradient not in GRADIENTS:
        raise ValueError(f"gradient must be one of {GRADIENTS}")
    return _lod_from_engine(_StudyEngine(cfg), gradient)


@dataclass(frozen=True)
class Table1Report:
    """Detection limits for every method under every drift case.

    cells maps (method, gradient) to a LodResult; failures maps the same
    keys to diagnostic strings for cells that could not be computed.
    """

    cells: dict
    failures: dict
    n_trials: int
    master_seed: int

    def lod(self, method: str, gradient: str) -> float:
        return self.cells[(method, gradient)].lod_riu

    def to_dict(self) -> dict:
        out = {
            "n_trials": self.n_trials,
            "master_seed": self.master_seed,
            "methods": list(METHODS),
            "gradients": list(GRADIENTS),
            "cells": {},
        }
        for (method, gradient), result in self.cells.items():
            out["cells"][f"{method}/{gradient}"] = {
                "lod_riu": result.lod_riu,
                "sigma_blank": result.sigma_blank,
                "delta_g": result.delta_g,
                "slope": result.slope,
                "linearity_ratio": result.linearity_ratio,
            }
        for (method, gradient), message in self.failures.items():
            out["cells"][f"{method}/{gradient}"] = {"error": message}
        return out


def run_table1(base_cfg: LodStudyConfig = LodStudyConfig(), *,
               allow_smoke_trials: bool = False) -> Table1Report:
    """Compute the full method-by-drift detection-limit matrix.

    Cell failures are recorded rather than aborting the rest of the
    matrix. Distributions shared between cells of one row (blank,
    calibration shift) are computed once. allow_smoke_trials waives the
    minimum trial count for quick shakedown runs whose numbers are not
    meant to be reported.
    """
    if base_cfg.n_trials < MIN_REPORTED_TRIALS and not allow_smoke_trials:
        raise ValueError(
            f"reported studies need at least {MIN_REPORTED_TRIALS} trials"
        )
    cells: dict = {}
    failures: dict = {}
    for method in METHODS:
        engine = _StudyEngine(replace(base_cfg, method=method))
        for gradient in GRADIENTS:
            try:
                cells[(method, gradient)] = _lod_from_engine(engine, gradient)
            except (StudyError, CalibrationError) as exc:
                failures[(method, gradient)] = str(exc)
    return Table1Report(
        cells=cells,
        failures=failures,
        n_trials=base_cfg.n_trials,
        master_seed=base_cfg.noise.seed,
    )
