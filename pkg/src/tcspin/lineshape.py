"""Two-level steady-state lineshape theory.

Steady-state excited population of a driven two-level transition,
saturation and power-broadening closed forms, and Gaussian
spectral-diffusion convolution evaluated through the Voigt profile.

All rates (gamma_decay, gamma_dephase, rabi, detunings) are angular
frequencies in 2*pi*MHz units; returned linewidths are ordinary-frequency
FWHM in MHz.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

# Gaussian HWHM -> standard deviation.
_HWHM_TO_SIGMA = 1.0 / math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class TwoLevelParams:
    """Decay rate Gamma and pure dephasing rate gamma (2*pi*MHz)."""

    gamma_decay: float
    gamma_dephase: float = 0.0

    def __post_init__(self):
        if self.gamma_decay <= 0:
            raise ValueError("gamma_decay must be > 0")
        if self.gamma_dephase < 0:
            raise ValueError("gamma_dephase must be >= 0")

    @property
    def gamma_total(self):
        """Total transverse rate gamma_t = gamma + Gamma/2."""
        return self.gamma_dephase + 0.5 * self.gamma_decay


@dataclass(frozen=True)
class DriveField:
    """One classical excitation field: Rabi frequency and detuning."""

    rabi: float
    detuning: float = 0.0

    def __post_init__(self):
        if self.rabi < 0:
            raise ValueError("rabi must be >= 0")


@dataclass(frozen=True)
class DiffusionKernel:
    """Area-normalized Gaussian distribution of quasi-static line shifts.

    hwhm is the Gaussian half width at half maximum (2*pi*MHz);
    quadrature_nodes sets the Gauss-Hermite order used for averages.
    """

    hwhm: float
    quadrature_nodes: int = 21

    def __post_init__(self):
        if self.hwhm < 0:
            raise ValueError("hwhm must be >= 0")
        if self.quadrature_nodes < 11 or self.quadrature_nodes % 2 == 0:
            raise ValueError("quadrature_nodes must be odd and >= 11")

    @property
    def sigma(self):
        return self.hwhm * _HWHM_TO_SIGMA

    def nodes_weights(self, n_nodes=None):
        """Shift samples and normalized weights for averaging over the
        kernel: sum(w_k * f(shift_k)) approximates the convolution with
        the unit-area Gaussian."""
        n = self.quadrature_nodes if n_nodes is None else n_nodes
        x, w = np.polynomial.hermite.hermgauss(n)
        return math.sqrt(2.0) * self.sigma * x, w / math.sqrt(math.pi)


def excited_population(params: TwoLevelParams, drive: DriveField):
    """Steady-state excited population of the driven two-level system.

    rho_ee = (1/2) Omega^2 / (Gamma Delta^2 / gamma_t + gamma_t Gamma
    + Omega^2); Lorentzian in the detuning and bounded by 1/2.
    """
    gt = params.gamma_total
    gamma = params.gamma_decay
    omega2 = drive.rabi**2
    return 0.5 * omega2 / (gamma * drive.detuning**2 / gt + gt * gamma + omega2)


def _excited_population_grid(params, rabi, detunings):
    gt = params.gamma_total
    gamma = params.gamma_decay
    omega2 = rabi**2
    return 0.5 * omega2 / (gamma * np.asarray(detunings) ** 2 / gt + gt * gamma + omega2)


def lorentzian_fwhm(params: TwoLevelParams, rabi: float):
    """Power-broadened FWHM in MHz: 2*sqrt(gamma_t^2 + Omega^2 gamma_t/Gamma).

    The factor-of-2pi conversion from angular rate to ordinary frequency
    cancels in this unit system, so the value below is directly in MHz.
    """
    gt = params.gamma_total
    return 2.0 * math.sqrt(gt**2 + rabi**2 * gt / params.gamma_decay)


def saturation_rabi(params: TwoLevelParams):
    """Rabi frequency at which the resonant excited population is 1/4."""
    return math.sqrt(params.gamma_total * params.gamma_decay)


def diffused_population(
    params: TwoLevelParams,
    kernel: DiffusionKernel,
    rabi: float,
    detuning: float,
):
    """Excited population convolved with the spectral-diffusion kernel.

    The steady state is an exact Lorentzian in the detuning, so its
    convolution with the area-normalized Gaussian is a Voigt profile and
    is evaluated in closed form (Gauss-Hermite quadrature cannot resolve
    the narrow-Lorentzian limit at useful node counts; the kernel's node
    budget is still honoured by the multi-level model, where no closed
    form exists). Reduces exactly to :func:`excited_population` when
    hwhm = 0.
    """
    if kernel.hwhm == 0.0 or rabi == 0.0:
        return excited_population(params, DriveField(rabi=rabi, detuning=detuning))
    gt = params.gamma_total
    gamma = params.gamma_decay
    # rho_ee = (Omega^2 gamma_t / 2 Gamma) / (Delta^2 + h^2), a Lorentzian
    # of HWHM h and area pi * Omega^2 gamma_t / (2 Gamma h).
    h = math.sqrt(gt**2 + rabi**2 * gt / gamma)
    area = math.pi * rabi**2 * gt / (2.0 * gamma * h)
    from scipy.special import voigt_profile

    return float(area * voigt_profile(detuning, kernel.sigma, h))


def diffused_saturation(params: TwoLevelParams, kernel: DiffusionKernel):
    """Saturation Rabi frequency and linewidth of the diffused line.

    Root-finds Omega_s' such that the diffused resonant population is 1/4,
    then the half-maximum detuning of the line at that power, returning
    (omega_s_prime in 2*pi*MHz, FWHM in MHz).
    """
    gt = params.gamma_total
    if kernel.hwhm == 0.0:
        return saturation_rabi(params), 2.0 * math.sqrt(2.0) * gt

    def sat_resid(omega):
        return diffused_population(params, kernel, omega, 0.0) - 0.25

    omega_hi = 1e3 * gt
    if sat_resid(omega_hi) < 0:
        raise RuntimeError("saturation bracket failed: line too diffused")
    omega_s = brentq(sat_resid, 0.0, omega_hi, rtol=1e-12)

    peak = diffused_population(params, kernel, omega_s, 0.0)

    def half_resid(delta):
        return diffused_population(params, kernel, omega_s, delta) - 0.5 * peak

    # Half point lies between 0 and the sum of the component widths.
    hi = 10.0 * (2.0 * math.sqrt(2.0) * gt + 2.0 * kernel.hwhm + omega_s)
    half = brentq(half_resid, 0.0, hi, rtol=1e-12)
    return omega_s, 2.0 * half


def thermal_dephasing(temperature_k: float, delta_e_mev: float, prefactor: float):
    """Arrhenius thermally activated dephasing: A * exp(-dE / kB T).

    Returns a gamma_t contribution in 2*pi*MHz. The activation energy of
    the excited-state doublet splitting is a required input; the prefactor
    is a calibration constant (see :func:`calibrate_thermal_prefactor`).
    """
    if temperature_k <= 0:
        raise ValueError("temperature_k must be > 0")
    if delta_e_mev <= 0:
        raise ValueError("delta_e_mev must be > 0")
    from .constants import K_B_MEV_PER_K

    return prefactor * math.exp(-delta_e_mev / (K_B_MEV_PER_K * temperature_k))


def calibrate_thermal_prefactor(anchor_temperature_k, anchor_rate, delta_e_mev):
    """Solve the Arrhenius prefactor from one (temperature, rate) anchor."""
    from .constants import K_B_MEV_PER_K

    return anchor_rate * math.exp(
        delta_e_mev / (K_B_MEV_PER_K * anchor_temperature_k)
    )
