"""Four-level semiclassical spin-optical model.

Levels (zero-based indices in matrices, 1-based in labels):
1 = |down_E>, 2 = |up_E> ground electron spin states;
3 = |down_H>, 4 = |up_H> excited hole spin states.

One or two classical fields drive the four optical transitions in a
rotating frame where each laser is attached to the ground state(s) whose
transitions it addresses. Decay branches into spin-preserving (B, C) and
spin-flipping (A, D) channels with branching ratio r; the drive couplings
carry the matching sqrt(r/(1+r)) and p*sqrt(1/(1+r)) dipole factors.

Dissipation: radiative collapse on each transition, uniform level
dephasing at rate gamma giving every optical coherence a decay gamma
(reproducing the stated low-power linewidth Gamma + 2*gamma and the
two-level reduction), and optional ground-state spin relaxation gamma_s.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..lineshape import DiffusionKernel, DriveField
from ..spinmodel import ZeemanModel

# Transitions keyed by (ground, excited) level, 1-based.
SPIN_PRESERVING = (("B", (1, 3)), ("C", (2, 4)))
SPIN_FLIPPING = (("A", (2, 3)), ("D", (1, 4)))

N_LEVELS = 4
DIM = N_LEVELS * N_LEVELS  # vectorized density matrix length

# Flat (row-major) indices of the diagonal of a 4x4 matrix.
DIAG_IDX = np.arange(N_LEVELS) * (N_LEVELS + 1)
IDX_33 = 2 * N_LEVELS + 2
IDX_44 = 3 * N_LEVELS + 3

@dataclass(frozen=True)
class FourLevelSystem:
    """All rates and couplings of the four-level model (2*pi*MHz units)."""

    zeeman: ZeemanModel
    gamma_decay: float
    gamma_dephase: float
    branching_r: float
    polarization_p: float
    diffusion: DiffusionKernel
    spin_relax: float = 0.0

    def __post_init__(self):
        if self.gamma_decay <= 0:
            raise ValueError("gamma_decay must be > 0")
        if self.gamma_dephase < 0 or self.spin_relax < 0:
            raise ValueError("rates must be >= 0")
        if self.branching_r < 0 or self.polarization_p < 0:
            raise ValueError("branching_r and polarization_p must be >= 0")

    def decay_rates(self):
        """Per-transition decay rates, keyed by (ground, excited); the two
        rates out of each excited level sum to gamma_decay exactly.
        branching_r = inf is the pure spin-preserving limit."""
        r = self.branching_r
        if np.isinf(r):
            keep, flip = self.gamma_decay, 0.0
        else:
            keep = self.gamma_decay * r / (1.0 + r)
            flip = self.gamma_decay * 1.0 / (1.0 + r)
        return {(1, 3): keep, (2, 4): keep, (2, 3): flip, (1, 4): flip}

    def rabi_scale(self, pair):
        """Dipole factor multiplying a laser's base Rabi frequency on the
        given (ground, excited) transition."""
        r = self.branching_r
        if pair in ((1, 3), (2, 4)):
            return 1.0 if np.isinf(r) else np.sqrt(r / (1.0 + r))
        if np.isinf(r):
            return 0.0
        return self.polarization_p * np.sqrt(1.0 / (1.0 + r))

    def transition_detunings(self):
        """Label -> transition detuning (2*pi*MHz) from spinmodel."""
        from ..spinmodel import transition_detunings

        return transition_detunings(self.zeeman).detunings


@dataclass(frozen=True)
class LaserPair:
    """One or two classical fields plus their rotating-frame assignment.

    assignment entries name the ground state(s) a laser addresses: 1, 2 or
    "both" (single laser resonant with both B and C). None selects the
    automatic rule: with two lasers, the bijective ground assignment that
    minimizes the total squared detuning to the nearest addressed
    transition; a lone laser addresses both ground states.
    """

    laser1: DriveField
    laser2: Optional[DriveField] = None
    assignment: Optional[tuple] = None

    def __post_init__(self):
        if self.assignment is not None:
            n = 1 if self.laser2 is None else 2
            if len(self.assignment) != n:
                raise ValueError("one assignment entry per laser")
            for a in self.assignment:
                if a not in (1, 2, "both"):
                    raise ValueError(f"invalid assignment {a!r}")
            if (
                n == 2
                and "both" in self.assignment
            ):
                raise ValueError(
                    "'both' assignment requires a single laser: two fields "
                    "sharing a ground state admit no static rotating frame"
                )
            if n == 2 and self.assignment[0] == self.assignment[1]:
                raise ValueError(
                    "both lasers assigned to the same ground state: no "
                    "static rotating frame exists"
                )

    def resolve_assignment(self, system: FourLevelSystem):
        """Concrete assignment tuple, applying the automatic rule."""
        if self.assignment is not None:
            return self.assignment
        if self.laser2 is None:
            return ("both",)
        det = system.transition_detunings()
        by_ground = {
            1: (det["B"], det["D"]),
            2: (det["A"], det["C"]),
        }

        def cost(delta, ground):
            return min((delta - t) ** 2 for t in by_ground[ground])

        straight = cost(self.laser1.detuning, 1) + cost(self.laser2.detuning, 2)
        crossed = cost(self.laser1.detuning, 2) + cost(self.laser2.detuning, 1)
        return (1, 2) if straight <= crossed else (2, 1)


def _sigma(i, j):
    """|i><j| with 1-based level labels."""
    m = np.zeros((N_LEVELS, N_LEVELS))
    m[i - 1, j - 1] = 1.0
    return m


def collapse_operators(system: FourLevelSystem, gamma_s=None):
    """List of collapse operators (4x4 arrays, rate already absorbed)."""
    ops = []
    for (g, e), rate in system.decay_rates().items():
        ops.append(np.sqrt(rate) * _sigma(g, e))
    gd = system.gamma_dephase
    if gd > 0:
        for i in range(1, N_LEVELS + 1):
            ops.append(np.sqrt(gd) * _sigma(i, i))
    gs = system.spin_relax if gamma_s is None else gamma_s
    if gs > 0:
        ops.append(np.sqrt(0.5 * gs) * _sigma(1, 2))
        ops.append(np.sqrt(0.5 * gs) * _sigma(2, 1))
    return ops


def hamiltonian_parts(system: FourLevelSystem, lasers: LaserPair):
    """Static Hamiltonian pieces in the rotating frame.

    Returns (h0, p1, p2): h0 is the detuning-independent Hamiltonian
    (Zeeman diagonal plus drive couplings); p1, p2 are the ground-state
    projectors multiplying the effective detunings (laser detuning minus
    common spectral-diffusion shift) of lasers 1 and 2. For a single
    laser p2 is zero.

    Frame convention: diagonal entries are Zeeman shift of each level,
    plus the laser detuning added on the ground state(s) it addresses, so
    a laser is resonant with transition (g, e) when its detuning equals
    the transition detuning from the zero-field line.
    """
    assign = lasers.resolve_assignment(system)
    shifts = system.zeeman.level_shifts()
    h0 = np.diag([shifts[i] for i in range(1, N_LEVELS + 1)])

    p1 = np.zeros((N_LEVELS, N_LEVELS))
    p2 = np.zeros((N_LEVELS, N_LEVELS))
    fields = [(lasers.laser1, assign[0], p1)]
    if lasers.laser2 is not None:
        fields.append((lasers.laser2, assign[1], p2))

    for drive, ground, proj in fields:
        grounds = (1, 2) if ground == "both" else (ground,)
        for g in grounds:
            proj[g - 1, g - 1] = 1.0
            for e in (3, 4):
                coupling = 0.5 * drive.rabi * system.rabi_scale((g, e))
                h0[g - 1, e - 1] -= coupling
                h0[e - 1, g - 1] -= coupling
    return h0, p1, p2


def _dissipator_matrix(ops):
    """Vectorized (row-major) Lindblad dissipator for the given operators."""
    eye = np.eye(N_LEVELS)
    d = np.zeros((DIM, DIM), dtype=complex)
    for c in ops:
        cdc = c.conj().T @ c
        d += np.kron(c, c.conj())
        d -= 0.5 * np.kron(cdc, eye)
        d -= 0.5 * np.kron(eye, cdc.T)
    return d


def build_generator_parts(system: FourLevelSystem, lasers: LaserPair, gamma_s=None):
    """Constant generator plus the two detuning-dependent diagonals.

    The full generator for effective detunings (d1, d2) is
    g0 + d1 * diag(d1diag) + d2 * diag(d2diag); d1diag/d2diag are purely
    imaginary 16-vectors from the commutator with the ground projectors.
    """
    h0, p1, p2 = hamiltonian_parts(system, lasers)
    eye = np.eye(N_LEVELS)
    g0 = -1j * (np.kron(h0, eye) - np.kron(eye, h0.T))
    g0 += _dissipator_matrix(collapse_operators(system, gamma_s=gamma_s))
    d1diag = -1j * (np.kron(p1, eye) - np.kron(eye, p1)).diagonal().astype(complex)
    d2diag = -1j * (np.kron(p2, eye) - np.kron(eye, p2)).diagonal().astype(complex)
    return g0, d1diag, d2diag


def build_generator(
    system: FourLevelSystem, lasers: LaserPair, common_shift: float = 0.0
):
    """Full 16x16 generator at one common spectral-diffusion shift."""
    g0, d1diag, d2diag = build_generator_parts(system, lasers)
    d1 = lasers.laser1.detuning - common_shift
    d2 = (lasers.laser2.detuning - common_shift) if lasers.laser2 is not None else 0.0
    return g0 + np.diag(d1 * d1diag + d2 * d2diag)
