"""Photonic enhancement and photon-budget accounting.

Relative collected intensity of an emitter inside a photonic structure,
band-weighted integrals against the emitter spectrum, the
spectrum-weighted Purcell factor, the resulting lifetime modification,
and detected count-rate arithmetic through a chain of loss factors.

The package ships a smooth default intensity table and emitter spectrum
(see tcspin/data); electromagnetic simulation of real structures is out
of scope and the table file format is the interface.
"""

from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.interpolate import RegularGridInterpolator

DEFAULT_TABLE_RESOURCE = "relative_intensity.csv"
DEFAULT_SPECTRUM_RESOURCE = "emitter_spectrum.csv"


@dataclass(frozen=True)
class RelativeIntensityTable:
    """Collection efficiency and Purcell factor on a (radius, wavelength) grid.

    eta_obj[i, j] and purcell[i, j] correspond to radius_nm[i] and
    wavelength_nm[j]. The relative collected intensity is their product,
    interpolated bilinearly; queries outside the grid hull are rejected.
    """

    wavelength_nm: np.ndarray
    radius_nm: np.ndarray
    eta_obj: np.ndarray
    purcell: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        wl = np.asarray(self.wavelength_nm, dtype=float)
        rad = np.asarray(self.radius_nm, dtype=float)
        eta = np.asarray(self.eta_obj, dtype=float)
        pf = np.asarray(self.purcell, dtype=float)
        if np.any(np.diff(wl) <= 0) or np.any(np.diff(rad) <= 0):
            raise ValueError("grids must be strictly increasing")
        if eta.shape != (rad.size, wl.size) or pf.shape != eta.shape:
            raise ValueError("eta_obj/purcell must be (n_radius, n_wavelength)")
        if np.any(eta < 0) or np.any(eta > 1):
            raise ValueError("eta_obj must lie in [0, 1]")
        if np.any(pf <= 0):
            raise ValueError("purcell must be > 0")
        object.__setattr__(self, "wavelength_nm", wl)
        object.__setattr__(self, "radius_nm", rad)
        object.__setattr__(self, "eta_obj", eta)
        object.__setattr__(self, "purcell", pf)

    def _interpolator(self, values):
        return RegularGridInterpolator(
            (self.radius_nm, self.wavelength_nm),
            values,
            method="linear",
            bounds_error=True,
        )

    @classmethod
    def load(cls, path, provenance=None):
        """Read `wavelength_nm,radius_nm,eta_obj,purcell` delimited text,
        row-major over (radius, wavelength)."""
        raw = np.genfromtxt(path, delimiter=",", names=True)
        wl = np.unique(raw["wavelength_nm"])
        rad = np.unique(raw["radius_nm"])
        n = rad.size * wl.size
        if raw.size != n:
            raise ValueError(f"expected {n} rows for the full grid, got {raw.size}")
        eta = raw["eta_obj"].reshape(rad.size, wl.size)
        pf = raw["purcell"].reshape(rad.size, wl.size)
        return cls(
            wavelength_nm=wl,
            radius_nm=rad,
            eta_obj=eta,
            purcell=pf,
            provenance=str(path) if provenance is None else provenance,
        )

    def save(self, path):
        with open(path, "w") as fh:
            fh.write("wavelength_nm,radius_nm,eta_obj,purcell\n")
            for i, r in enumerate(self.radius_nm):
                for j, w in enumerate(self.wavelength_nm):
                    fh.write(
                        f"{w:.10g},{r:.10g},"
                        f"{self.eta_obj[i, j]:.12g},{self.purcell[i, j]:.12g}\n"
                    )


@dataclass(frozen=True)
class EmitterSpectrum:
    """Area-normalized emission spectral density on a wavelength grid.

    density_per_nm integrates (trapezoid) to 1; the fraction within
    zpl_window_nm of the zero-phonon wavelength equals the Debye-Waller
    parameter.
    """

    wavelength_nm: np.ndarray
    density_per_nm: np.ndarray
    zpl_nm: float = 1326.0
    debye_waller: float = 0.23
    zpl_window_nm: float = 4.0

    def __post_init__(self):
        wl = np.asarray(self.wavelength_nm, dtype=float)
        dens = np.asarray(self.density_per_nm, dtype=float)
        if np.any(np.diff(wl) <= 0):
            raise ValueError("wavelength grid must be strictly increasing")
        if np.any(dens < 0):
            raise ValueError("density must be >= 0")
        area = np.trapezoid(dens, wl)
        if abs(area - 1.0) > 1e-6:
            raise ValueError(f"spectrum area {area} != 1")
        object.__setattr__(self, "wavelength_nm", wl)
        object.__setattr__(self, "density_per_nm", dens)

    def zpl_fraction(self):
        """Trapezoid mass within zpl_window_nm of the zero-phonon line."""
        lo = self.zpl_nm - self.zpl_window_nm
        hi = self.zpl_nm + self.zpl_window_nm
        return _trapezoid_between(self.wavelength_nm, self.density_per_nm, lo, hi)

    @classmethod
    def load(cls, path, **kw):
        raw = np.genfromtxt(path, delimiter=",", names=True)
        return cls(
            wavelength_nm=raw["wavelength_nm"],
            density_per_nm=raw["density_per_nm"],
            **kw,
        )

    def save(self, path):
        with open(path, "w") as fh:
            fh.write("wavelength_nm,density_per_nm\n")
            for w, d in zip(self.wavelength_nm, self.density_per_nm):
                fh.write(f"{w:.10g},{d:.12g}\n")


@dataclass(frozen=True)
class EfficiencyChain:
    """Multiplicative detection losses: detector, path and window."""

    detector: float = 0.15
    path: float = 0.33
    window: float = 0.66

    def __post_init__(self):
        for name in ("detector", "path", "window"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} efficiency must be in (0, 1]")

    @property
    def product(self):
        return self.detector * self.path * self.window


@dataclass(frozen=True)
class LifetimeModel:
    """Radiative lifetime modification by the photonic environment."""

    bulk_lifetime_ns: float
    weighted_purcell: float
    radiative_efficiency: float

    def __post_init__(self):
        if self.bulk_lifetime_ns <= 0:
            raise ValueError("bulk_lifetime_ns must be > 0")
        if self.weighted_purcell <= 0:
            raise ValueError("weighted_purcell must be > 0")
        if not 0 <= self.radiative_efficiency <= 1:
            raise ValueError("radiative_efficiency must be in [0, 1]")


def _default_data(resource):
    return resources.files("tcspin.data").joinpath(resource)


def load_default_table() -> RelativeIntensityTable:
    """Shipped smooth surrogate table (calibrated, not an EM simulation)."""
    with resources.as_file(_default_data(DEFAULT_TABLE_RESOURCE)) as path:
        return RelativeIntensityTable.load(path, provenance="tcspin default surrogate")


def load_default_spectrum() -> EmitterSpectrum:
    with resources.as_file(_default_data(DEFAULT_SPECTRUM_RESOURCE)) as path:
        return EmitterSpectrum.load(path)


def relative_intensity(table: RelativeIntensityTable, wavelength_nm, radius_nm):
    """Bilinear interpolation of eta_obj * purcell at (wavelength, radius).

    No extrapolation: queries outside the grid hull raise ValueError.
    """
    interp = table._interpolator(table.eta_obj * table.purcell)
    wl = np.asarray(wavelength_nm, dtype=float)
    pts = np.stack(np.broadcast_arrays(np.asarray(radius_nm, dtype=float), wl), axis=-1)
    out = interp(pts)
    if np.isscalar(wavelength_nm) and np.isscalar(radius_nm):
        return float(out.reshape(-1)[0])
    return out


def _trapezoid_between(x, y, lo, hi):
    """Trapezoid integral of the piecewise-linear (x, y) over [lo, hi],
    clipped to the support of x."""
    lo = max(lo, x[0])
    hi = min(hi, x[-1])
    if hi <= lo:
        return 0.0
    inner = x[(x > lo) & (x < hi)]
    grid = np.concatenate(([lo], inner, [hi]))
    return float(np.trapezoid(np.interp(grid, x, y), grid))


def band_integral(table, spectrum: EmitterSpectrum, band, radius_nm):
    """Relative intensity of the emitter spectrum within a band.

    Trapezoidal integral of I_r(lambda, r) * density(lambda) over
    band = (lambda_lo, lambda_hi) in nm. The band must lie within the
    table's wavelength grid; it is additive across a shared endpoint.
    """
    lo, hi = float(band[0]), float(band[1])
    if hi <= lo:
        raise ValueError("band must have positive width")
    wl_t = table.wavelength_nm
    if lo < wl_t[0] or hi > wl_t[-1]:
        raise ValueError("band outside the table wavelength grid")
    wl_s = spectrum.wavelength_nm
    lo_c, hi_c = max(lo, wl_s[0]), min(hi, wl_s[-1])
    if hi_c <= lo_c:
        return 0.0
    inner = wl_s[(wl_s > lo_c) & (wl_s < hi_c)]
    grid = np.concatenate(([lo_c], inner, [hi_c]))
    dens = np.interp(grid, wl_s, spectrum.density_per_nm)
    ir = relative_intensity(table, grid, np.full_like(grid, float(radius_nm)))
    return float(np.trapezoid(ir * dens, grid))


def weighted_purcell(table, spectrum: EmitterSpectrum, radius_nm):
    """Emitter-spectrum-weighted average of the Purcell factor."""
    wl_s = spectrum.wavelength_nm
    wl_t = table.wavelength_nm
    if wl_s[0] < wl_t[0] or wl_s[-1] > wl_t[-1]:
        raise ValueError("spectrum extends outside the table wavelength grid")
    interp = table._interpolator(table.purcell)
    pts = np.stack([np.full_like(wl_s, float(radius_nm)), wl_s], axis=-1)
    pf = interp(pts)
    return float(np.trapezoid(pf * spectrum.density_per_nm, wl_s))


def lifetime_ratio(model: LifetimeModel):
    """tau / tau_bulk = P_w * eta_R + (1 - eta_R)."""
    return (
        model.weighted_purcell * model.radiative_efficiency
        + (1.0 - model.radiative_efficiency)
    )


def invert_radiative_efficiency(ratio, weighted_purcell_value):
    """Radiative efficiency implied by a lifetime ratio.

    Returns (eta_R, feasible); feasible is False when the closed-form
    value falls outside [0, 1]. weighted_purcell_value = 1 leaves eta_R
    unidentifiable and raises.
    """
    if weighted_purcell_value <= 0:
        raise ValueError("weighted Purcell must be > 0")
    if weighted_purcell_value == 1.0:
        raise ValueError(
            "weighted Purcell of 1 makes the lifetime independent of the "
            "radiative efficiency: unidentifiable"
        )
    eta = (ratio - 1.0) / (weighted_purcell_value - 1.0)
    return eta, 0.0 <= eta <= 1.0


def expected_count_rate(tau_bulk_ns, band_ir, chain: EfficiencyChain):
    """Detected counts/s from a saturated emitter.

    (1 / (2 tau)) * band_ir * detector * path * window; the 1/2 is the
    resonantly saturated excited-state occupation.
    """
    if tau_bulk_ns <= 0 or band_ir <= 0:
        raise ValueError("tau_bulk_ns and band_ir must be > 0")
    return 0.5 / (tau_bulk_ns * 1e-9) * band_ir * chain.product


def loss_correct(measured_cps, chain: EfficiencyChain):
    """Emitted-into-band rate inferred from the detected rate."""
    if measured_cps < 0:
        raise ValueError("measured_cps must be >= 0")
    return measured_cps / chain.product


def discrepancy_factor(expected_cps, measured_cps):
    """Ratio of expected to measured detected count rates."""
    if measured_cps <= 0:
        raise ValueError("measured_cps must be > 0")
    return expected_cps / measured_cps
