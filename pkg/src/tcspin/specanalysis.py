"""Measurement-side analysis of spectra and transients.

Peak detection and lineshape fitting for excitation/emission spectra,
survey aggregation across many devices, exponential lifetime fitting,
intensity-ratio thermometry and a defect-concentration estimate.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import signal
from scipy.optimize import least_squares
from scipy.special import erfcx

from .constants import K_B_MEV_PER_K
from .spectra import Spectrum1D

_FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))

PEAK_MODELS = ("lorentzian", "gaussian_lorentzian_product")


@dataclass(frozen=True)
class PeakCandidate:
    """Detected local maximum before any model fitting."""

    index: int
    position: float
    height: float
    prominence: float


@dataclass(frozen=True)
class PeakFit:
    """Fitted line: center and FWHM in axis units, peak amplitude above
    the baseline, analytic area of the model curve and the residual norm."""

    center: float
    fwhm: float
    amplitude: float
    model: str
    area: float
    residual: float
    baseline: float
    fwhm_gauss: Optional[float] = None

    def __post_init__(self):
        if self.fwhm <= 0:
            raise ValueError("fwhm must be > 0")
        if self.model not in PEAK_MODELS:
            raise ValueError(f"unknown model {self.model!r}")


@dataclass(frozen=True)
class TransientTrace:
    """Time-binned fluorescence decay with the excitation-off marker."""

    time_ns: np.ndarray
    counts: np.ndarray
    off_time_ns: float = 0.0

    def __post_init__(self):
        t = np.asarray(self.time_ns, dtype=float)
        c = np.asarray(self.counts, dtype=float)
        if np.any(np.diff(t) <= 0):
            raise ValueError("time axis must be strictly increasing")
        if t.shape != c.shape:
            raise ValueError("time and counts must have the same length")
        object.__setattr__(self, "time_ns", t)
        object.__setattr__(self, "counts", c)


@dataclass
class SurveyStats:
    """Aggregate of peak fits across a device survey."""

    positions: np.ndarray
    linewidths: np.ndarray
    median_linewidth: float
    position_hist: tuple  # (counts, bin edges)
    linewidth_hist: tuple
    peaks_per_device: np.ndarray
    mean_peaks_per_device: float
    # FWHM of a Gaussian matched to the position scatter; one summary of
    # the inhomogeneous distribution, not a claim about its true shape.
    position_spread_fwhm: float = field(default=0.0)


def find_peaks(spectrum: Spectrum1D, min_prominence=None, min_width_points=3):
    """Local maxima with prominence above threshold and minimum width.

    Prominence is measured against the higher of the two flanking minima.
    The default threshold is five times the median absolute deviation of
    the counts. Returns PeakCandidate objects sorted by position.
    """
    counts = spectrum.counts
    if counts.size < 5:
        raise ValueError("need at least 5 points")
    if min_prominence is None:
        mad = np.median(np.abs(counts - np.median(counts)))
        min_prominence = 5.0 * mad
    idx, props = signal.find_peaks(
        counts, prominence=min_prominence, width=min_width_points
    )
    return [
        PeakCandidate(
            index=int(i),
            position=float(spectrum.axis[i]),
            height=float(counts[i]),
            prominence=float(p),
        )
        for i, p in zip(idx, props["prominences"])
    ]


def _lorentzian(x, center, fwhm):
    h = 0.5 * fwhm
    return h * h / ((x - center) ** 2 + h * h)


def _gauss_lorentz_product(x, center, fwhm_g, fwhm_l):
    sig = fwhm_g * _FWHM_TO_SIGMA
    g = np.exp(-0.5 * ((x - center) / sig) ** 2)
    return g * _lorentzian(x, center, fwhm_l)


def _peak_area(model, amplitude, fwhm_l, fwhm_g=None):
    """Closed-form area of the unit-peak model times amplitude."""
    h = 0.5 * fwhm_l
    if model == "lorentzian":
        return amplitude * math.pi * h
    sig = fwhm_g * _FWHM_TO_SIGMA
    # integral of exp(-x^2/2 sig^2) * h^2/(x^2+h^2) = pi h erfcx(h / (sig sqrt 2))
    return amplitude * math.pi * h * erfcx(h / (sig * math.sqrt(2.0)))


def fit_peak(spectrum: Spectrum1D, window, model="lorentzian") -> PeakFit:
    """Least-squares fit of one peak plus constant baseline in a window.

    window = (axis_lo, axis_hi). The gaussian_lorentzian_product model is
    amplitude * G(x; c, w_g) * L(x; c, w_l) with a shared center. Raises
    RuntimeError when the optimizer fails to converge.
    """
    if model not in PEAK_MODELS:
        raise ValueError(f"unknown model {model!r}")
    lo, hi = window
    sel = (spectrum.axis >= lo) & (spectrum.axis <= hi)
    x = spectrum.axis[sel]
    y = spectrum.counts[sel]
    if x.size < 5:
        raise ValueError("window contains fewer than 5 points")

    base0 = float(np.min(y))
    amp0 = float(np.max(y) - base0)
    if amp0 <= 0:
        raise RuntimeError("window contains no peak above the baseline")
    c0 = float(x[np.argmax(y)])
    # crude initial width: span above half maximum
    above = x[y - base0 > 0.5 * amp0]
    w0 = max(float(above[-1] - above[0]), 2.0 * float(np.min(np.diff(x))))
    span = float(x[-1] - x[0])

    if model == "lorentzian":
        def resid(p):
            a, c, w, b = p
            return a * _lorentzian(x, c, w) + b - y

        p0 = [amp0, c0, w0, base0]
        lower = [0.0, lo, 1e-6 * span, -np.inf]
        upper = [np.inf, hi, 10.0 * span, np.inf]
    else:
        def resid(p):
            a, c, wg, wl, b = p
            return a * _gauss_lorentz_product(x, c, wg, wl) + b - y

        p0 = [amp0, c0, 2.0 * w0, 2.0 * w0, base0]
        lower = [0.0, lo, 1e-6 * span, 1e-6 * span, -np.inf]
        upper = [np.inf, hi, 20.0 * span, 20.0 * span, np.inf]

    sol = least_squares(resid, p0, bounds=(lower, upper), xtol=1e-13, ftol=1e-13)
    if not (sol.status > 0 and np.all(np.isfinite(sol.x))):
        raise RuntimeError(f"peak fit did not converge: {sol.message}")

    if model == "lorentzian":
        a, c, w, b = sol.x
        fwhm, fwhm_g = float(w), None
        area = _peak_area(model, a, w)
    else:
        a, c, wg, wl, b = sol.x
        fwhm = _product_fwhm(wg, wl)
        fwhm_g = float(wg)
        area = _peak_area(model, a, wl, wg)
    return PeakFit(
        center=float(c),
        fwhm=float(fwhm),
        amplitude=float(a),
        model=model,
        area=float(area),
        residual=float(np.linalg.norm(sol.fun)),
        baseline=float(b),
        fwhm_gauss=fwhm_g,
    )


def _product_fwhm(fwhm_g, fwhm_l):
    """FWHM of the unit-peak Gaussian-Lorentzian product by bisection."""
    from scipy.optimize import brentq

    def f(x):
        return _gauss_lorentz_product(x, 0.0, fwhm_g, fwhm_l) - 0.5

    hi = 0.5 * min(fwhm_g, fwhm_l)
    while f(hi) > 0:
        hi *= 2.0
    return 2.0 * brentq(f, 0.0, hi, xtol=1e-12)


def evaluate_peak(fit: PeakFit, x):
    """Fitted model curve (baseline included) on an axis array."""
    x = np.asarray(x, dtype=float)
    if fit.model == "lorentzian":
        return fit.amplitude * _lorentzian(x, fit.center, fit.fwhm) + fit.baseline
    # fwhm stores the product FWHM; rebuild the Lorentzian component width
    # from the area closed form is ill-posed, so keep it via fwhm_gauss
    # and solve the Lorentzian width from the product FWHM.
    wl = _lorentz_width_from_product(fit.fwhm_gauss, fit.fwhm)
    return (
        fit.amplitude * _gauss_lorentz_product(x, fit.center, fit.fwhm_gauss, wl)
        + fit.baseline
    )


def _lorentz_width_from_product(fwhm_g, fwhm_product):
    from scipy.optimize import brentq

    def f(wl):
        return _product_fwhm(fwhm_g, wl) - fwhm_product

    lo, hi = 1e-6 * fwhm_product, 1e6 * fwhm_product
    return brentq(f, lo, hi, xtol=1e-12)


def survey_stats(
    fits_by_device,
    position_bin_width=1.0,
    linewidth_bin_width=0.25,
) -> SurveyStats:
    """Aggregate peak fits grouped per device.

    fits_by_device: one list of PeakFit per surveyed device (empty lists
    count as devices with no peak). Bin widths are in axis units.
    """
    if not fits_by_device:
        raise ValueError("need at least one device")
    flat = [f for device in fits_by_device for f in device]
    if not flat:
        raise ValueError("need at least one peak fit")
    positions = np.array([f.center for f in flat])
    widths = np.array([f.fwhm for f in flat])

    def hist(values, width):
        lo = width * math.floor(values.min() / width)
        hi = width * math.ceil(values.max() / width)
        edges = np.arange(lo, hi + 0.5 * width, width)
        if edges.size < 2:
            edges = np.array([lo, lo + width])
        return np.histogram(values, bins=edges)

    per_device = np.array([len(d) for d in fits_by_device])
    spread = 0.0
    if positions.size > 1:
        spread = float(np.std(positions, ddof=1) / _FWHM_TO_SIGMA)
    return SurveyStats(
        positions=positions,
        linewidths=widths,
        median_linewidth=float(np.median(widths)),
        position_hist=hist(positions, position_bin_width),
        linewidth_hist=hist(widths, linewidth_bin_width),
        peaks_per_device=per_device,
        mean_peaks_per_device=float(per_device.mean()),
        position_spread_fwhm=spread,
    )


def fit_lifetime(trace: TransientTrace, fit_window, settle_ns=0.0):
    """Exponential decay fit A exp(-t/tau) + b over a time window.

    The window must start after the excitation-off marker plus settle
    time. Returns (tau_ns, sigma_tau_ns, baseline); sigma from the
    Jacobian scaled by the reduced chi-square. Raises RuntimeError on
    non-decaying data.
    """
    lo, hi = fit_window
    if lo < trace.off_time_ns + settle_ns:
        raise ValueError("fit window must start after excitation off + settle")
    sel = (trace.time_ns >= lo) & (trace.time_ns <= hi)
    t = trace.time_ns[sel]
    y = trace.counts[sel]
    if t.size < 4:
        raise ValueError("fit window contains fewer than 4 points")

    b0 = float(np.min(y))
    a0 = max(float(y[0] - b0), 1e-12)
    tau0 = max(float(t[-1] - t[0]) / 3.0, 1.0)

    def resid(p):
        a, tau, b = p
        return a * np.exp(-(t - t[0]) / tau) + b - y

    sol = least_squares(
        resid,
        [a0, tau0, b0],
        bounds=([0.0, 1e-6, -np.inf], [np.inf, np.inf, np.inf]),
        xtol=1e-13,
        ftol=1e-13,
    )
    a, tau, b = sol.x
    if a <= 0 or not sol.status > 0:
        raise RuntimeError("transient is not decaying; no lifetime fit")

    dof = max(t.size - 3, 1)
    red_chi2 = 2.0 * sol.cost / dof
    cov = np.linalg.inv(sol.jac.T @ sol.jac) * red_chi2
    return float(tau), float(math.sqrt(max(cov[1, 1], 0.0))), float(b)


def ratio_from_temperature(temperature_k, delta_e_mev, calib_g):
    """Boltzmann-activated intensity ratio g exp(-dE / kB T)."""
    if temperature_k <= 0:
        raise ValueError("temperature must be > 0")
    return calib_g * math.exp(-delta_e_mev / (K_B_MEV_PER_K * temperature_k))


def temperature_from_ratio(ratio, delta_e_mev, calib_g):
    """Invert the activated-ratio model for the temperature in kelvin."""
    if ratio <= 0 or delta_e_mev <= 0 or calib_g <= 0:
        raise ValueError("ratio, delta_e_mev and calib_g must be > 0")
    if ratio >= calib_g:
        raise ValueError("ratio must be below the infinite-temperature limit g")
    return delta_e_mev / (K_B_MEV_PER_K * math.log(calib_g / ratio))


def calibrate_thermometry(ratio, temperature_k, delta_e_mev):
    """Degeneracy prefactor g from one (ratio, temperature) anchor."""
    if ratio <= 0 or temperature_k <= 0 or delta_e_mev <= 0:
        raise ValueError("all calibration inputs must be > 0")
    return ratio * math.exp(delta_e_mev / (K_B_MEV_PER_K * temperature_k))


def concentration_lower_bound(total_centres, device_count, radius_nm, thickness_nm):
    """Defect concentration in cm^-3 assuming all centres sit inside the
    probed device volumes: n = N / (devices * pi r^2 t)."""
    if min(total_centres, device_count, radius_nm, thickness_nm) <= 0:
        raise ValueError("all inputs must be > 0")
    volume_cm3 = math.pi * radius_nm**2 * thickness_nm * 1e-21
    return total_centres / (device_count * volume_cm3)
