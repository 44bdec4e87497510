"""Shared builders for four-level test systems."""

import math

from tcspin.lineshape import DiffusionKernel, DriveField
from tcspin.lindblad import FourLevelSystem, LaserPair
from tcspin.spinmodel import ZeemanModel

GAMMA = 1.0 / (2.0 * math.pi * 0.940)


def make_system(
    b0=0.0881,
    g_h=2.76,
    gamma=127.415,
    r=1.2,
    p=2.9,
    sd_hwhm=0.0,
    spin_relax=0.0,
):
    return FourLevelSystem(
        zeeman=ZeemanModel(b0_tesla=b0, g_e=2.005, g_h=g_h),
        gamma_decay=GAMMA,
        gamma_dephase=gamma,
        branching_r=r,
        polarization_p=p,
        diffusion=DiffusionKernel(hwhm=sd_hwhm),
        spin_relax=spin_relax,
    )


def random_driven_system(rng):
    """System plus a two-laser drive in the regime where the steady state
    is reached well within the propagation-oracle horizon."""
    system = make_system(
        b0=rng.uniform(0.04, 0.16),
        g_h=rng.uniform(0.9, 3.5),
        gamma=rng.uniform(50.0, 200.0),
        r=rng.uniform(0.5, 2.0),
        p=rng.uniform(1.0, 4.0),
    )
    det = system.transition_detunings()
    lasers = LaserPair(
        laser1=DriveField(
            rabi=rng.uniform(8.0, 20.0), detuning=det["B"] + rng.uniform(-50, 50)
        ),
        laser2=DriveField(
            rabi=rng.uniform(8.0, 20.0), detuning=det["C"] + rng.uniform(-50, 50)
        ),
        assignment=(1, 2),
    )
    return system, lasers
