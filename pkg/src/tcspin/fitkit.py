"""Simultaneous nonlinear least-squares fitting of PLE scans to the
four-level model, plus synthetic-dataset generation for round trips.

A fit stacks the residuals of one or more scans (pump-probe or
single-frequency) and minimizes them over any subset of the model
parameters {b0, g_h, gamma_sd, omega1, omega2, r, p, gamma}; the
remainder are held fixed. Uncertainties come from the Jacobian at the
optimum, scaled by the reduced chi-square.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import least_squares

from .constants import G_E_BULK, GAMMA_DECAY_BULK
from .lineshape import DiffusionKernel, DriveField
from .lindblad import FourLevelSystem
from .lindblad.ops import pump_probe_scan, single_laser_scan
from .spectra import Spectrum1D
from .spinmodel import ZeemanModel

# Canonical model parameter order; every parameter appears exactly once
# across a FitProblem's free and fixed sets.
PARAM_NAMES = ("b0", "g_h", "gamma_sd", "omega1", "omega2", "r", "p", "gamma")

DEFAULT_BOUNDS = {
    "b0": (1e-4, 1.0),
    "g_h": (0.5, 4.0),
    "gamma_sd": (0.0, 5e3),
    "omega1": (0.1, 200.0),
    "omega2": (0.1, 200.0),
    "r": (0.01, 50.0),
    "p": (0.01, 50.0),
    "gamma": (1.0, 1e3),
}


@dataclass(frozen=True)
class ScanConfig:
    """How one dataset was (or is to be) acquired.

    kind 'pump_probe': laser `pump_laser` (1 or 2) fixed at pump_detuning,
    the other laser scanned over probe_grid. kind 'single': one laser
    addressing both ground states scanned over probe_grid. Detunings in
    2*pi*MHz; normalization converts detected counts to population scale.
    """

    kind: str
    probe_grid: np.ndarray
    pump_detuning: float = 0.0
    pump_laser: int = 1
    normalization: float = 1.0
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("pump_probe", "single"):
            raise ValueError("kind must be 'pump_probe' or 'single'")
        if self.pump_laser not in (1, 2):
            raise ValueError("pump_laser must be 1 or 2")
        object.__setattr__(
            self, "probe_grid", np.asarray(self.probe_grid, dtype=float)
        )

    def probe_laser(self):
        return 2 if self.pump_laser == 1 else 1


def build_system(params, g_e=G_E_BULK, gamma_decay=GAMMA_DECAY_BULK, nodes=21):
    """FourLevelSystem from a full parameter dict."""
    return FourLevelSystem(
        zeeman=ZeemanModel(b0_tesla=params["b0"], g_e=g_e, g_h=params["g_h"]),
        gamma_decay=gamma_decay,
        gamma_dephase=params["gamma"],
        branching_r=params["r"],
        polarization_p=params["p"],
        diffusion=DiffusionKernel(hwhm=params["gamma_sd"], quadrature_nodes=nodes),
    )


def evaluate_scan(params, config: ScanConfig, **system_kw):
    """Model fluorescence on the scan grid for one configuration."""
    system = build_system(params, **system_kw)
    omega = {1: params["omega1"], 2: params["omega2"]}
    if config.kind == "single":
        # pump_laser names the power parameter driving the lone field
        return single_laser_scan(
            system, config.probe_grid, omega[config.pump_laser]
        ).counts
    pump = DriveField(rabi=omega[config.pump_laser], detuning=config.pump_detuning)
    return pump_probe_scan(
        system, pump, config.probe_grid, omega[config.probe_laser()]
    ).counts


@dataclass
class FitProblem:
    """Datasets plus the free/fixed split of the model parameters."""

    datasets: list  # of (ScanConfig, Spectrum1D) pairs
    free_params: tuple
    fixed_params: dict
    bounds: dict = field(default_factory=dict)
    g_e: float = G_E_BULK
    gamma_decay: float = GAMMA_DECAY_BULK
    quadrature_nodes: int = 21

    def __post_init__(self):
        names = set(self.free_params) | set(self.fixed_params)
        if names != set(PARAM_NAMES):
            missing = set(PARAM_NAMES) - names
            extra = names - set(PARAM_NAMES)
            raise ValueError(
                f"free+fixed must cover the model parameters exactly; "
                f"missing={sorted(missing)} unknown={sorted(extra)}"
            )
        if set(self.free_params) & set(self.fixed_params):
            raise ValueError("a parameter cannot be both free and fixed")
        if not self.datasets:
            raise ValueError("at least one dataset required")

    def bound_pair(self, name):
        return self.bounds.get(name, DEFAULT_BOUNDS[name])

    def full_params(self, x):
        params = dict(self.fixed_params)
        params.update(dict(zip(self.free_params, x)))
        return params

    def residuals(self, x):
        params = self.full_params(x)
        res = []
        for config, spectrum in self.datasets:
            model = evaluate_scan(
                params,
                config,
                g_e=self.g_e,
                gamma_decay=self.gamma_decay,
                nodes=self.quadrature_nodes,
            )
            data = spectrum.counts / config.normalization
            res.append(data - model)
        return np.concatenate(res)


@dataclass
class FitResult:
    """Best-fit values, 1-sigma uncertainties and diagnostics."""

    values: dict
    sigmas: dict
    covariance: np.ndarray
    free_params: tuple
    residual_norms: list
    n_evaluations: int
    gradient_norm: float
    converged: bool
    message: str
    reduced_chi2: float

    def summary(self):
        lines = []
        for name in self.free_params:
            lines.append(f"{name} = {self.values[name]:.6g} +- {self.sigmas[name]:.3g}")
        lines.append(f"converged: {self.converged} ({self.message})")
        return "\n".join(lines)


def fit(
    problem: FitProblem,
    initial: dict,
    max_nfev: int = 2000,
    diff_step: float = 1e-6,
) -> FitResult:
    """Trust-region least squares over the problem's free parameters.

    initial maps free parameter names to starting values (must lie inside
    the bounds). The Jacobian uses forward finite differences with
    relative step diff_step. Non-convergence is reported in the result,
    never silently ignored.
    """
    x0 = np.array([initial[name] for name in problem.free_params], dtype=float)
    lo = np.array([problem.bound_pair(n)[0] for n in problem.free_params])
    hi = np.array([problem.bound_pair(n)[1] for n in problem.free_params])
    if np.any(x0 < lo) or np.any(x0 > hi):
        raise ValueError("initial guess outside bounds")

    sol = least_squares(
        problem.residuals,
        x0,
        bounds=(lo, hi),
        method="trf",
        diff_step=diff_step,
        xtol=1e-12,
        ftol=1e-12,
        gtol=1e-12,
        max_nfev=max_nfev,
    )

    n_points = sol.fun.size
    n_free = len(problem.free_params)
    dof = max(n_points - n_free, 1)
    chi2 = float(2.0 * sol.cost)
    red_chi2 = chi2 / dof

    jtj = sol.jac.T @ sol.jac
    try:
        cov = np.linalg.inv(jtj) * red_chi2
    except np.linalg.LinAlgError:
        raise RuntimeError(
            "singular normal matrix: unidentifiable parameter combination "
            f"among {problem.free_params}"
        )
    sigmas = np.sqrt(np.maximum(np.diag(cov), 0.0))

    values = problem.full_params(sol.x)
    per_ds = []
    offset = 0
    for config, spectrum in problem.datasets:
        n = len(config.probe_grid)
        per_ds.append(float(np.linalg.norm(sol.fun[offset : offset + n])))
        offset += n

    return FitResult(
        values=values,
        sigmas=dict(zip(problem.free_params, sigmas)),
        covariance=cov,
        free_params=problem.free_params,
        residual_norms=per_ds,
        n_evaluations=int(sol.nfev),
        gradient_norm=float(np.max(np.abs(sol.grad))),
        converged=bool(sol.status > 0),
        message=str(sol.message),
        reduced_chi2=red_chi2,
    )


def normalize_counts(spectrum: Spectrum1D, saturated_level: float) -> Spectrum1D:
    """Scale detected counts to the excited-population axis."""
    if saturated_level <= 0:
        raise ValueError("saturated_level must be > 0")
    return Spectrum1D(
        axis=spectrum.axis,
        counts=spectrum.counts / saturated_level,
        axis_unit=spectrum.axis_unit,
        dwell_s=spectrum.dwell_s,
    )


def model_jacobian(problem: FitProblem, x, step=1e-6, scheme="forward"):
    """Finite-difference Jacobian of the stacked residuals.

    scheme 'forward' matches the fitter's internal differencing;
    'central' is the higher-order check used by the gradient sanity test.
    """
    x = np.asarray(x, dtype=float)
    f0 = problem.residuals(x) if scheme == "forward" else None
    cols = []
    for k in range(x.size):
        h = step * max(abs(x[k]), 1.0) if x[k] == 0 else step * abs(x[k])
        e = np.zeros_like(x)
        e[k] = h
        if scheme == "forward":
            cols.append((problem.residuals(x + e) - f0) / h)
        elif scheme == "central":
            cols.append((problem.residuals(x + e) - problem.residuals(x - e)) / (2 * h))
        else:
            raise ValueError("scheme must be 'forward' or 'central'")
    return np.stack(cols, axis=1)


def synthesize(
    params,
    configs,
    seed=None,
    dwell_s: float = 1.0,
    peak_rate: float = 0.0,
    g_e=G_E_BULK,
    gamma_decay=GAMMA_DECAY_BULK,
    nodes=21,
):
    """Synthetic datasets from the model on the given scan configs.

    peak_rate > 0 scales the ensemble so its brightest point emits
    peak_rate counts/s, then draws Poisson counts per point with the
    given seed; peak_rate = 0 returns exact model values. Returns
    (datasets, scale) where scale is counts per unit excited population
    (the normalization constant for fitting); scale is 1.0 in the
    noiseless case.
    """
    curves = [evaluate_scan(params, c, g_e=g_e, gamma_decay=gamma_decay, nodes=nodes)
              for c in configs]
    if peak_rate <= 0:
        datasets = [
            (replace(c, normalization=1.0), Spectrum1D(axis=c.probe_grid * 1e-3, counts=y))
            for c, y in zip(configs, curves)
        ]
        return datasets, 1.0

    peak = max(float(np.max(y)) for y in curves)
    if peak <= 0:
        raise ValueError("model is identically zero; cannot scale to counts")
    scale = peak_rate * dwell_s / peak
    rng = np.random.default_rng(seed)
    datasets = []
    for c, y in zip(configs, curves):
        counts = rng.poisson(y * scale).astype(float)
        datasets.append(
            (
                replace(c, normalization=scale),
                Spectrum1D(axis=c.probe_grid * 1e-3, counts=counts, dwell_s=dwell_s),
            )
        )
    return datasets, scale
