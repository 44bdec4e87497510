"""Spin-dependent optical transition structure in a static magnetic field.

Four levels: 1 = |down_E>, 2 = |up_E> (ground electron spin) and
3 = |down_H>, 4 = |up_H> (excited hole spin), ordered by energy for
g_h > g_e. The four optical transitions are labelled A, B, C, D with
detunings from the zero-field line

    delta = (mu_B * B0 / 2) * (+-g_e +- g_h).

A and D flip the spin projection, B and C preserve it.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .constants import MU_B_MHZ_PER_T, G_H_RANGE

# Label -> (ground level, excited level). Fixed by the energy-ordering
# convention plus the spin-preserving decay structure (Gamma_31 = Gamma_42);
# documented by a structural test rather than recomputed.
TRANSITION_PAIRS = {"A": (2, 3), "B": (1, 3), "C": (2, 4), "D": (1, 4)}

LABELS = ("A", "B", "C", "D")


@dataclass(frozen=True)
class ZeemanModel:
    """Static-field splitting parameters of a single centre."""

    b0_tesla: float
    g_e: float
    g_h: float

    def __post_init__(self):
        if self.b0_tesla < 0:
            raise ValueError("b0_tesla must be >= 0")
        if self.g_e <= 0 or self.g_h <= 0:
            raise ValueError("Lande factors must be > 0")
        if not (G_H_RANGE[0] <= self.g_h <= G_H_RANGE[1]):
            warnings.warn(
                f"g_h={self.g_h} outside the documented physical range "
                f"{G_H_RANGE}; proceeding anyway",
                stacklevel=2,
            )

    def level_shifts(self):
        """Zeeman shift of each level (2*pi*MHz), keyed 1..4."""
        half = 0.5 * MU_B_MHZ_PER_T * self.b0_tesla
        return {
            1: -self.g_e * half,
            2: +self.g_e * half,
            3: -self.g_h * half,
            4: +self.g_h * half,
        }


@dataclass(frozen=True)
class TransitionSet:
    """The four labelled transitions of one centre in one field."""

    detunings: dict  # label -> detuning (2*pi*MHz)
    pairs: dict  # label -> (ground level, excited level)


def transition_detunings(model: ZeemanModel) -> TransitionSet:
    """Detunings of the four labelled transitions from the zero-field line.

    Each transition detuning is the excited-level shift minus the
    ground-level shift, so A = -D and B = -C exactly, and
    A <= B <= C <= D when g_h > g_e.
    """
    z = model.level_shifts()
    detunings = {
        label: z[exc] - z[gnd] for label, (gnd, exc) in TRANSITION_PAIRS.items()
    }
    return TransitionSet(detunings=detunings, pairs=dict(TRANSITION_PAIRS))


def bc_splitting(model: ZeemanModel) -> float:
    """B-C transition splitting in GHz.

    Equals (g_h - g_e) * mu_B * b0; negative when g_h < g_e, in which case
    the energy ordering of B and C flips.
    """
    return (model.g_h - model.g_e) * MU_B_MHZ_PER_T * model.b0_tesla * 1e-3


def ad_splitting(model: ZeemanModel) -> float:
    """A-D transition splitting in GHz: (g_h + g_e) * mu_B * b0."""
    return (model.g_h + model.g_e) * MU_B_MHZ_PER_T * model.b0_tesla * 1e-3


def field_from_splittings(bc_ghz: float, ad_ghz: float, g_e: float):
    """Invert the splitting formulas: (B-C, A-D) -> (b0_tesla, g_h).

    The B-C splitting is signed (negative means C below B); the A-D
    splitting must exceed its magnitude for a consistent assignment.
    """
    if g_e <= 0:
        raise ValueError("g_e must be > 0")
    if ad_ghz <= abs(bc_ghz):
        raise ValueError(
            "A-D splitting must exceed |B-C| splitting; "
            "inconsistent peak assignment"
        )
    # ad = (g_h + g_e) mu_B b0,  bc = (g_h - g_e) mu_B b0
    b0 = (ad_ghz - bc_ghz) * 1e3 / (2.0 * g_e * MU_B_MHZ_PER_T)
    g_h = g_e * (ad_ghz + bc_ghz) / (ad_ghz - bc_ghz)
    return b0, g_h


def random_models(n, rng=None, b_range=(0.01, 0.2), g_h_range=G_H_RANGE):
    """Sample n random valid ZeemanModel instances (test/validation helper)."""
    rng = np.random.default_rng(rng)
    out = []
    for _ in range(n):
        out.append(
            ZeemanModel(
                b0_tesla=float(rng.uniform(*b_range)),
                g_e=2.005,
                g_h=float(rng.uniform(*g_h_range)),
            )
        )
    return out
