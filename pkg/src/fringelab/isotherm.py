"""Adsorption-isotherm fitting and concentration-domain detection limits.

The response of a sensor surface to an analyte concentration C follows the
Redlich-Peterson form theta(C) = I + A C / (1 + B C^beta) with beta in
[0, 1] (the Langmuir isotherm at beta = 1). Fitting is variance-weighted
nonlinear least squares over replicate groups; the detection limit is the
concentration where the fitted curve rises a given amount above its own
intercept. A separate helper linearizes integrated-difference responses,
whose raw output folds over once a shift exceeds half the free spectral
range.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, least_squares

from .errors import FitError, FoldOverError, SaturationError
from .filmsim import FilmStack, simulate_reflectance
from .legacy import IawConfig, iaw

# Display-unit scales relative to the canonical mol/L storage.
UNIT_SCALES = {
    "M": 1.0,
    "mM": 1e-3,
    "uM": 1e-6,
    "nM": 1e-9,
    "pM": 1e-12,
}

N_PARAMETERS = 4  # intercept, a, b, beta
BETA_STARTS = (0.2, 0.5, 0.8, 0.95, 1.0)


@dataclass(frozen=True)
class ConcentrationGroup:
    """Replicate responses measured at one equilibrium concentration.

    concentration is stored in mol/L. variance, when supplied, overrides
    the replicate sample variance for weighting.
    """

    concentration: float
    responses: tuple
    variance: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "responses", tuple(float(r) for r in self.responses))
        if self.concentration < 0:
            raise ValueError("concentrations must be non-negative")
        if not all(math.isfinite(r) for r in self.responses):
            raise ValueError("responses must be finite")
        if len(self.responses) < 2 and self.variance is None:
            raise ValueError("need >= 2 replicates per group or a supplied variance")
        if self.variance is not None and self.variance < 0:
            raise ValueError("supplied variance must be non-negative")

    def mean(self) -> float:
        return float(np.mean(self.responses))

    def sample_variance(self) -> float:
        if self.variance is not None:
            return float(self.variance)
        return float(np.var(self.responses, ddof=1))


@dataclass(frozen=True)
class ConcentrationSeries:
    """Ascending concentration groups plus the unit used for display/fitting."""

    groups: tuple
    display_unit: str = "uM"

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        if self.display_unit not in UNIT_SCALES:
            raise ValueError(f"unknown unit {self.display_unit!r}; use one of {sorted(UNIT_SCALES)}")
        conc = [g.concentration for g in self.groups]
        if any(b <= a for a, b in zip(conc, conc[1:])):
            raise ValueError("group concentrations must be strictly ascending")

    @classmethod
    def from_display(cls, concentrations, response_groups, unit: str = "uM",
                     variances=None) -> "ConcentrationSeries":
        """Build a series from concentrations expressed in the display unit."""
        if unit not in UNIT_SCALES:
            raise ValueError(f"unknown unit {unit!r}; use one of {sorted(UNIT_SCALES)}")
        scale = UNIT_SCALES[unit]
        if variances is None:
            variances = [None] * len(concentrations)
        groups = tuple(
            ConcentrationGroup(c * scale, tuple(r), v)
            for c, r, v in zip(concentrations, response_groups, variances)
        )
        return cls(groups=groups, display_unit=unit)

    def display_concentrations(self) -> np.ndarray:
        scale = UNIT_SCALES[self.display_unit]
        return np.array([g.concentration / scale for g in self.groups])

    def n_points(self) -> int:
        return sum(len(g.responses) for g in self.groups)


@dataclass(frozen=True)
class RedlichPetersonFit:
    """Fitted isotherm theta(C) = intercept + a C / (1 + b C^beta).

    Parameter units follow the concentration unit the fit was performed
    in: a carries signal per concentration, b carries concentration^-beta.
    """

    intercept: float
    a: float
    b: float
    beta: float
    reduced_chi2: float | None = None
    covariance: tuple | None = None

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.b < 0:
            raise ValueError("b must be non-negative")


def model_eval(fit: RedlichPetersonFit, concentration):
    """Evaluate the isotherm at one or many concentrations (>= 0).

    C = 0 returns the intercept exactly: the numerator vanishes, so the
    0^beta corner never contributes.
    """
    c = np.asarray(concentration, dtype=float)
    if np.any(c < 0):
        raise ValueError("concentrations must be non-negative")
    positive = c > 0
    powered = np.zeros_like(c)
    np.power(c, fit.beta, where=positive, out=powered)
    theta = fit.intercept + fit.a * c / (1.0 + fit.b * powered)
    if np.isscalar(concentration) or np.ndim(concentration) == 0:
        return float(theta)
    return theta


def _effective_sigmas(series: ConcentrationSeries):
    """Per-group weighting sigmas with fallbacks for degenerate variances.

    Zero or non-finite group variances fall back to the pooled variance of
    the healthy groups; if no group has usable spread, weights collapse to
    unity. Both fallbacks warn, since they change the estimator.
    """
    variances = np.array([g.sample_variance() for g in series.groups])
    usable = np.isfinite(variances) & (variances > 0)
    if not usable.all():
        if usable.any():
            pooled = float(variances[usable].mean())
            warnings.warn(
                "zero-variance concentration groups weighted by the pooled variance",
                stacklevel=3,
            )
            variances = np.where(usable, variances, pooled)
        else:
            warnings.warn(
                "no usable group variances; falling back to unweighted residuals",
                stacklevel=3,
            )
            variances = np.ones_like(variances)
    return np.sqrt(variances)


def _residuals(params, series, sigmas):
    intercept, a, b, beta = params
    fit = RedlichPetersonFit(intercept=intercept, a=a, b=b, beta=min(max(beta, 0.0), 1.0))
    out = []
    for group, sigma in zip(series.groups, sigmas):
        theta = model_eval(fit, group.concentration / UNIT_SCALES[series.display_unit])
        out.extend((r - theta) / sigma for r in group.responses)
    return np.asarray(out)


def _starting_points(series: ConcentrationSeries):
    conc = series.display_concentrations()
    means = np.array([g.mean() for g in series.groups])
    intercept0 = means[0]
    positive = conc[conc > 0]
    c_ref = float(np.median(positive))
    c_top = float(positive[-1])
    top_rise = max(means[-1] - intercept0, 1e-12 * max(abs(means[-1]), 1.0))
    for beta0 in BETA_STARTS:
        b0 = 1.0 / c_ref**beta0
        a0 = top_rise * (1.0 + b0 * c_top**beta0) / c_top
        yield np.array([intercept0, a0, b0, beta0])


def fit_redlich_peterson(series: ConcentrationSeries) -> RedlichPetersonFit:
    """Variance-weighted least-squares fit of the four isotherm parameters.

    Each replicate contributes (y - theta(C)) / sigma_group. The bounded
    solver runs from several beta starting values and the lowest-cost
    converged solution wins; concentrations enter in the series' display
    unit, so the returned a and b are scaled to that unit.
    """
    if len(series.groups) < N_PARAMETERS:
        raise ValueError(f"need at least {N_PARAMETERS} concentration groups")
    if not any(g.concentration > 0 for g in series.groups):
        raise ValueError("need at least one positive concentration")
    sigmas = _effective_sigmas(series)
    lower = [-np.inf, 0.0, 0.0, 0.0]
    upper = [np.inf, np.inf, np.inf, 1.0]
    best = None
    diagnostics = []
    for x0 in _starting_points(series):
        try:
            result = least_squares(
                _residuals, x0, args=(series, sigmas),
                bounds=(lower, upper), method="trf", x_scale="jac",
                max_nfev=5000,
            )
        except Exception as exc:  # noqa: BLE001 - collected for the failure message
            diagnostics.append(f"start beta={x0[3]:.2f}: {exc}")
            continue
        if not result.success or not np.isfinite(result.cost):
            diagnostics.append(f"start beta={x0[3]:.2f}: status {result.status}")
            continue
        if best is None or result.cost < best.cost:
            best = result
    if best is None:
        raise FitError("no fit start converged: " + "; ".join(diagnostics))
    intercept, a, b, beta = best.x
    n_points = series.n_points()
    reduced = 2.0 * best.cost / (n_points - N_PARAMETERS) if n_points > N_PARAMETERS else None
    jtj = best.jac.T @ best.jac
    try:
        covariance = tuple(map(tuple, np.linalg.inv(jtj)))
    except np.linalg.LinAlgError:
        covariance = None
    return RedlichPetersonFit(
        intercept=float(intercept),
        a=float(a),
        b=float(b),
        beta=float(min(max(beta, 0.0), 1.0)),
        reduced_chi2=reduced,
        covariance=covariance,
    )


def reduced_chi_squared(fit: RedlichPetersonFit, series: ConcentrationSeries) -> float:
    """Weighted residual sum over (points - parameters) degrees of freedom."""
    n_points = series.n_points()
    if n_points <= N_PARAMETERS:
        raise ValueError(
            f"reduced chi-squared undefined for {n_points} points and "
            f"{N_PARAMETERS} parameters"
        )
    sigmas = _effective_sigmas(series)
    residuals = _residuals((fit.intercept, fit.a, fit.b, fit.beta), series, sigmas)
    return float(np.sum(residuals**2) / (n_points - N_PARAMETERS))


def lod_concentration(fit: RedlichPetersonFit, three_sigma_blank: float) -> float:
    """Concentration where the fitted curve exceeds its intercept by the noise floor.

    Solves theta(C) = intercept + three_sigma_blank on the monotone branch
    by bracket expansion and bisection, to 1e-6 relative in C. The result
    is expressed in the same unit the fit's parameters carry.
    """
    if not three_sigma_blank > 0:
        raise ValueError("three_sigma_blank must be positive")
    if not fit.a > 0:
        raise ValueError("model is not increasing: a must be positive")
    if fit.b == 0.0:
        return three_sigma_blank / fit.a
    if fit.beta == 1.0 and three_sigma_blank >= fit.a / fit.b:
        raise SaturationError(
            f"threshold {three_sigma_blank:g} is at or above the model's "
            f"saturation rise {fit.a / fit.b:g}"
        )

    def rise(c: float) -> float:
        return model_eval(fit, c) - fit.intercept - three_sigma_blank

    low = three_sigma_blank / fit.a  # linear model reaches the threshold here
    high = low
    for _ in range(2000):
        high *= 2.0
        if rise(high) >= 0.0:
            break
    else:
        raise SaturationError(
            f"threshold {three_sigma_blank:g} not reached by the fitted "
            "isotherm within any bounded concentration"
        )
    return float(brentq(rise, low, high, rtol=1e-9))


@dataclass(frozen=True)
class IawCorrection:
    """Quadratic linearization of the integrated-difference response.

    coefficients hold the fitted deviation-from-linear polynomial
    (highest degree first, in percent optical-thickness change);
    linear_slope is the response per percent at vanishing shift.
    """

    coefficients: tuple
    linear_slope: float
    max_eot_percent: float

    def deviation(self, eot_percent):
        return np.polyval(self.coefficients, eot_percent)

    def correct(self, response, eot_percent):
        """Rescale a measured response onto the linear trend.

        The measured percent optical-thickness change must come from an
        independent estimator, since the folded response itself is not
        invertible.
        """
        eot = np.asarray(eot_percent, dtype=float)
        linear = self.linear_slope * eot
        predicted = linear + self.deviation(eot)
        ratio = np.divide(linear, predicted, where=predicted != 0,
                          out=np.ones_like(eot))
        corrected = np.asarray(response) * ratio
        if np.ndim(eot_percent) == 0 and np.ndim(response) == 0:
            return float(corrected)
        return corrected


def iaw_fold_limit_percent(stack: FilmStack, range_nm=(500.0, 800.0)) -> float:
    """Largest percent optical-thickness change before the response folds.

    The integrated difference grows until the fringe pattern has shifted
    by half a period at the band's mean wavenumber, i.e. an optical
    thickness change of 1/(2 sigma_bar).
    """
    sigma_bar = (1.0 / range_nm[0] + 1.0 / range_nm[1]) / 2.0
    return 100.0 * (0.5 / sigma_bar) / stack.effective_optical_thickness_nm


def iaw_nonlinearity_correction(
    stack: FilmStack,
    range_nm=(500.0, 800.0),
    max_eot_percent: float = 4.0,
    n_sweep: int = 25,
    n_wavelengths: int = 768,
) -> IawCorrection:
    """Calibrate the sub-linearity of the integrated difference by sweeping
    simulated index shifts and fitting the deviation from the initial slope
    with a second-order polynomial.
    """
    if not max_eot_percent > 0:
        raise ValueError("max_eot_percent must be positive")
    if n_sweep < 5:
        raise ValueError("need at least 5 sweep points")
    limit = iaw_fold_limit_percent(stack, range_nm)
    if max_eot_percent >= limit:
        raise FoldOverError(
            f"sweep to {max_eot_percent:g}% crosses the fold-over at "
            f"{limit:.3f}% (half the free spectral range)"
        )
    wavelengths = np.linspace(range_nm[0], range_nm[1], n_wavelengths)
    reference = simulate_reflectance(stack, wavelengths)
    cfg = IawConfig(range_nm=tuple(range_nm))
    percents = np.linspace(0.0, max_eot_percent, n_sweep)
    responses = np.empty_like(percents)
    responses[0] = 0.0
    for i, pct in enumerate(percents[1:], start=1):
        delta_n = stack.film_index * pct / 100.0
        shifted = simulate_reflectance(stack.with_film_index_shift(delta_n), wavelengths)
        responses[i] = iaw(reference, shifted, cfg)
    slope = responses[1] / percents[1]
    deviation = responses - slope * percents
    coefficients = tuple(float(c) for c in np.polyfit(percents, deviation, 2))
    return IawCorrection(
        coefficients=coefficients,
        linear_slope=float(slope),
        max_eot_percent=float(max_eot_percent),
    )
