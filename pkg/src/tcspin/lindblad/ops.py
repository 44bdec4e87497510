"""Steady states, diffusion-averaged fluorescence, scans and maps."""

from dataclasses import dataclass

import numpy as np

from ..lineshape import DriveField
from ..spectra import Map2D, Spectrum1D
from .model import (
    N_LEVELS,
    FourLevelSystem,
    LaserPair,
    build_generator_parts,
)
from . import solver


@dataclass
class SteadyState:
    """Steady-state density matrix and its fluorescence observable."""

    rho: np.ndarray
    fluorescence: float

    def check(self, tol_herm=1e-10, tol_trace=1e-10, tol_pos=1e-9):
        """Raise unless Hermitian, unit trace and positive semidefinite."""
        if np.max(np.abs(self.rho - self.rho.conj().T)) > tol_herm:
            raise ValueError("steady state not Hermitian")
        if abs(np.trace(self.rho).real - 1.0) > tol_trace:
            raise ValueError("steady state trace != 1")
        if np.min(np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T))) < -tol_pos:
            raise ValueError("steady state not positive semidefinite")


def steady_state(
    system: FourLevelSystem, lasers: LaserPair, common_shift: float = 0.0
) -> SteadyState:
    """Steady state at one fixed spectral-diffusion shift.

    Generic drives give a one-dimensional generator null space and a
    direct solve. A degenerate null space (drive couplings that leave a
    level fully disconnected, e.g. branching_r = inf with a single laser
    and spin_relax = 0) is resolved as the long-time limit starting from
    the lowest ground state: the initial state is projected onto the null
    space along the decaying eigendirections. For reachable shelving
    states this coincides with the gamma_s -> 0+ limit (dark steady
    state).
    """
    g0, d1diag, d2diag = build_generator_parts(system, lasers)
    d1 = lasers.laser1.detuning - common_shift
    d2 = (lasers.laser2.detuning - common_shift) if lasers.laser2 is not None else 0.0
    gen = g0 + np.diag(d1 * d1diag + d2 * d2diag)
    try:
        vec = solver.steady_state_vector(gen)
        residual = np.max(np.abs(gen @ vec))
        scale = max(np.max(np.abs(gen)), 1.0)
        if not np.all(np.isfinite(vec)) or residual > 1e-8 * scale:
            raise np.linalg.LinAlgError("degenerate null space")
    except np.linalg.LinAlgError:
        vec = _long_time_limit(gen)
    rho = vec.reshape(N_LEVELS, N_LEVELS)
    return SteadyState(rho=rho, fluorescence=float(np.real(rho[2, 2] + rho[3, 3])))


def _long_time_limit(gen, rtol=1e-10):
    """t -> inf limit of exp(gen * t) applied to vec(|1><1|)."""
    w, v = np.linalg.eig(gen)
    scale = max(np.max(np.abs(w)), 1.0)
    null = np.abs(w) < rtol * scale
    if not np.any(null):
        raise np.linalg.LinAlgError("generator has no steady state")
    rho0 = np.zeros(N_LEVELS * N_LEVELS, dtype=complex)
    rho0[0] = 1.0  # |1><1|
    coeff = np.linalg.solve(v, rho0)
    coeff[~null] = 0.0
    vec = v @ coeff
    tr = np.real(vec[np.arange(N_LEVELS) * (N_LEVELS + 1)].sum())
    if abs(tr) < 1e-12:
        raise np.linalg.LinAlgError("long-time limit lost all trace")
    return vec / tr


def fluorescence(system: FourLevelSystem, lasers: LaserPair) -> float:
    """Fluorescence averaged over the spectral-diffusion kernel.

    The random line shift is common-mode: it moves the whole transition
    pattern, which is equivalent to shifting both laser detunings by the
    same amount.
    """
    return float(_scan_batch(system, lasers, np.zeros(1))[0])


def _scan_batch(system, lasers, probe_offsets, scanned=None):
    """Diffusion-averaged fluorescence for a set of probe offsets.

    probe_offsets are added to the detuning of the scanned laser (2 when
    present, else 1); offsets of zero reproduce `fluorescence`.
    """
    g0, d1diag, d2diag = build_generator_parts(system, lasers)
    base1 = lasers.laser1.detuning
    base2 = lasers.laser2.detuning if lasers.laser2 is not None else 0.0
    if scanned is None:
        scanned = 1 if lasers.laser2 is None else 2

    if system.diffusion.hwhm > 0:
        shifts, weights = system.diffusion.nodes_weights()
    else:
        shifts, weights = np.zeros(1), np.ones(1)

    off = np.asarray(probe_offsets, dtype=float)
    d1 = base1 - shifts[None, :] + (off[:, None] if scanned == 1 else 0.0)
    d2 = base2 - shifts[None, :] + (off[:, None] if scanned == 2 else 0.0)
    d1, d2 = np.broadcast_arrays(d1, d2)
    fl = solver.fluorescence_batch(g0, d1diag, d2diag, d1, d2)
    return fl @ weights


def single_laser_scan(
    system: FourLevelSystem, grid, rabi: float
) -> Spectrum1D:
    """Single-frequency scan addressing both ground states.

    grid: laser detunings in 2*pi*MHz; returns a spectrum with a GHz axis.
    """
    grid = np.asarray(grid, dtype=float)
    lasers = LaserPair(
        laser1=DriveField(rabi=rabi, detuning=0.0), assignment=("both",)
    )
    fl = _scan_batch(system, lasers, grid, scanned=1)
    return Spectrum1D(axis=grid * 1e-3, counts=fl, axis_unit="GHz")


def pump_probe_scan(
    system: FourLevelSystem,
    pump: DriveField,
    probe_grid,
    probe_rabi: float,
) -> Spectrum1D:
    """Fix laser 1 at the pump, scan laser 2 over probe_grid (2*pi*MHz).

    The rotating-frame ground assignment is re-resolved at every grid
    point (automatic rule), so the probe picks up the transitions of
    whichever ground state the pump leaves unaddressed.
    """
    probe_grid = np.asarray(probe_grid, dtype=float)
    if np.any(np.diff(probe_grid) <= 0):
        raise ValueError("probe grid must be sorted ascending")
    det = system.transition_detunings()
    if min(abs(pump.detuning - d) for d in det.values()) > 50e3:
        raise ValueError("pump detuning further than 50 GHz from any transition")

    fl = np.empty_like(probe_grid)
    # Assignment can flip along the scan; group contiguous runs of equal
    # assignment and batch each run.
    assigns = [
        LaserPair(
            laser1=pump, laser2=DriveField(rabi=probe_rabi, detuning=float(g))
        ).resolve_assignment(system)
        for g in probe_grid
    ]
    start = 0
    for i in range(1, len(probe_grid) + 1):
        if i == len(probe_grid) or assigns[i] != assigns[start]:
            lasers = LaserPair(
                laser1=pump,
                laser2=DriveField(rabi=probe_rabi, detuning=0.0),
                assignment=assigns[start],
            )
            fl[start:i] = _scan_batch(
                system, lasers, probe_grid[start:i], scanned=2
            )
            start = i
    return Spectrum1D(axis=probe_grid * 1e-3, counts=fl, axis_unit="GHz")


def two_colour_map(
    system: FourLevelSystem, grid1, rabi1, grid2, rabi2
) -> Map2D:
    """Two-colour fluorescence map over detuning grids (2*pi*MHz)."""
    grid1 = np.asarray(grid1, dtype=float)
    grid2 = np.asarray(grid2, dtype=float)
    if np.any(np.diff(grid1) <= 0) or np.any(np.diff(grid2) <= 0):
        raise ValueError("grids must be sorted ascending")
    out = np.empty((grid1.size, grid2.size))
    for i, g1 in enumerate(grid1):
        laser1 = DriveField(rabi=rabi1, detuning=float(g1))
        assigns = [
            LaserPair(
                laser1=laser1, laser2=DriveField(rabi=rabi2, detuning=float(g2))
            ).resolve_assignment(system)
            for g2 in grid2
        ]
        start = 0
        for j in range(1, grid2.size + 1):
            if j == grid2.size or assigns[j] != assigns[start]:
                lasers = LaserPair(
                    laser1=laser1,
                    laser2=DriveField(rabi=rabi2, detuning=0.0),
                    assignment=assigns[start],
                )
                out[i, start:j] = _scan_batch(
                    system, lasers, grid2[start:j], scanned=2
                )
                start = j
    return Map2D(axis1=grid1 * 1e-3, axis2=grid2 * 1e-3, counts=out)
