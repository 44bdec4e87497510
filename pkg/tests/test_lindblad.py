"""Four-level model correctness against independent oracles."""

import numpy as np
import pytest
from scipy.linalg import expm

from tcspin.lineshape import (
    DiffusionKernel,
    DriveField,
    TwoLevelParams,
    excited_population,
)
from tcspin.lindblad import (
    FourLevelSystem,
    HAVE_KERNEL,
    LaserPair,
    build_generator,
    build_generator_parts,
    collapse_operators,
    fluorescence,
    pump_probe_scan,
    set_backend,
    single_laser_scan,
    steady_state,
)
from tcspin.lindblad.model import DIAG_IDX, DIM, N_LEVELS
from tcspin.lindblad import solver
from tcspin.spinmodel import ZeemanModel

from conftest import GAMMA, make_system, random_driven_system


def propagate(generator, t):
    """Long-time density matrix by exponentiating the generator (oracle)."""
    rho0 = np.zeros(DIM, dtype=complex)
    rho0[0] = 1.0
    return (expm(generator * t) @ rho0).reshape(N_LEVELS, N_LEVELS)


def test_generator_preserves_trace():
    rng = np.random.default_rng(5)
    for _ in range(10):
        system, lasers = random_driven_system(rng)
        gen = build_generator(system, lasers)
        # d(tr rho)/dt = sum of diagonal rows applied to any state
        assert np.max(np.abs(gen[DIAG_IDX, :].sum(axis=0))) < 1e-10


def test_decay_rates_sum_to_gamma():
    system = make_system(r=1.7)
    rates = system.decay_rates()
    assert rates[(1, 3)] + rates[(2, 3)] == pytest.approx(GAMMA, rel=1e-12)
    assert rates[(2, 4)] + rates[(1, 4)] == pytest.approx(GAMMA, rel=1e-12)
    pure = make_system(r=np.inf)
    assert pure.decay_rates()[(2, 3)] == 0.0
    assert pure.decay_rates()[(1, 3)] == pytest.approx(GAMMA, rel=1e-12)


def test_collapse_operator_count():
    system = make_system(gamma=100.0, spin_relax=0.5)
    ops = collapse_operators(system)
    # 4 decay channels + 4 dephasing projectors + 2 spin relaxation
    assert len(ops) == 10


def test_steady_state_is_physical():
    rng = np.random.default_rng(11)
    for _ in range(25):
        system, lasers = random_driven_system(rng)
        state = steady_state(system, lasers)
        state.check()
        assert 0.0 <= state.fluorescence <= 1.0


def test_steady_state_matches_propagation_oracle():
    rng = np.random.default_rng(17)
    t_final = 50.0 / GAMMA
    worst = 0.0
    for _ in range(20):
        system, lasers = random_driven_system(rng)
        gen = build_generator(system, lasers)
        rho_ss = steady_state(system, lasers).rho
        rho_t = propagate(gen, t_final)
        worst = max(worst, np.max(np.abs(rho_ss - rho_t)))
    assert worst < 1e-6


def test_two_level_reduction():
    """Pure spin-preserving decay with the laser attached to ground 1 is
    exactly the driven two-level system on the B transition."""
    system = make_system(gamma=127.415, r=np.inf)
    det = system.transition_detunings()
    params = TwoLevelParams(gamma_decay=GAMMA, gamma_dephase=127.415)
    for rabi in (2.0, 4.6, 15.0):
        for offset in (0.0, -180.0, 420.0):
            lasers = LaserPair(
                laser1=DriveField(rabi=rabi, detuning=det["B"] + offset),
                assignment=(1,),
            )
            four = steady_state(system, lasers).fluorescence
            two = excited_population(params, DriveField(rabi=rabi, detuning=offset))
            assert four == pytest.approx(two, abs=1e-6)


def test_hyperpolarization_dark_state():
    """A single laser on a resolved spin-preserving line pumps the centre
    into the unaddressed ground state and the fluorescence vanishes."""
    system = make_system(gamma=127.415, r=1.2)
    det = system.transition_detunings()
    lasers = LaserPair(
        laser1=DriveField(rabi=10.0, detuning=det["B"]), assignment=(1,)
    )
    state = steady_state(system, lasers)
    assert state.fluorescence < 1e-8
    assert np.real(state.rho[1, 1]) == pytest.approx(1.0, abs=1e-8)


def test_spin_relaxation_restores_fluorescence():
    det = make_system().transition_detunings()
    lasers = LaserPair(
        laser1=DriveField(rabi=10.0, detuning=det["B"]), assignment=(1,)
    )
    bright = steady_state(make_system(spin_relax=0.01), lasers).fluorescence
    assert bright > 1e-4


def test_pump_probe_peaks_on_partner_transitions():
    """Pumping A repolarizes the centre whenever the probe hits a
    transition from the other ground state: peaks at B and D."""
    system = make_system(sd_hwhm=100.0)
    det = system.transition_detunings()
    grid = np.arange(-3500.0, 3500.1, 50.0)
    spec = pump_probe_scan(
        system, DriveField(rabi=10.0, detuning=det["A"]), grid, 10.0
    )
    counts = spec.counts
    idx = [
        i
        for i in range(1, len(grid) - 1)
        if counts[i] >= counts[i - 1] and counts[i] >= counts[i + 1]
        and counts[i] > 0.2 * counts.max()
    ]
    positions = np.sort(spec.axis[idx]) * 1e3
    assert len(positions) == 2
    assert abs(positions[0] - det["B"]) <= 50.0
    assert abs(positions[1] - det["D"]) <= 50.0


def test_single_laser_scan_symmetry():
    system = make_system(sd_hwhm=200.0)
    grid = np.arange(-3200.0, 3200.1, 100.0)
    spec = single_laser_scan(system, grid, 8.0)
    assert np.all(spec.counts >= 0)
    assert np.allclose(spec.counts, spec.counts[::-1], atol=1e-10)


def test_diffused_fluorescence_quadrature_converged():
    det = make_system().transition_detunings()
    lasers = LaserPair(
        laser1=DriveField(rabi=10.0, detuning=det["A"]),
        laser2=DriveField(rabi=14.0, detuning=det["B"] + 120.0),
        assignment=(2, 1),
    )
    coarse = fluorescence(make_system(sd_hwhm=400.0), lasers)
    fine = fluorescence(
        FourLevelSystem(
            zeeman=ZeemanModel(b0_tesla=0.0881, g_e=2.005, g_h=2.76),
            gamma_decay=GAMMA,
            gamma_dephase=127.415,
            branching_r=1.2,
            polarization_p=2.9,
            diffusion=DiffusionKernel(hwhm=400.0, quadrature_nodes=61),
        ),
        lasers,
    )
    assert coarse == pytest.approx(fine, rel=1e-3)


def test_laser_assignment_rules():
    system = make_system()
    det = system.transition_detunings()
    pair = LaserPair(
        laser1=DriveField(rabi=5.0, detuning=det["B"] + 10.0),
        laser2=DriveField(rabi=5.0, detuning=det["C"] - 10.0),
    )
    assert pair.resolve_assignment(system) == (1, 2)
    crossed = LaserPair(
        laser1=DriveField(rabi=5.0, detuning=det["A"] + 10.0),
        laser2=DriveField(rabi=5.0, detuning=det["D"] - 10.0),
    )
    assert crossed.resolve_assignment(system) == (2, 1)
    lone = LaserPair(laser1=DriveField(rabi=5.0, detuning=0.0))
    assert lone.resolve_assignment(system) == ("both",)

    with pytest.raises(ValueError):
        LaserPair(
            laser1=DriveField(rabi=5.0, detuning=0.0),
            laser2=DriveField(rabi=5.0, detuning=0.0),
            assignment=(1, 1),
        )
    with pytest.raises(ValueError):
        LaserPair(
            laser1=DriveField(rabi=5.0, detuning=0.0),
            laser2=DriveField(rabi=5.0, detuning=0.0),
            assignment=("both", 2),
        )


@pytest.mark.skipif(not HAVE_KERNEL, reason="compiled kernel not built")
def test_backends_agree():
    rng = np.random.default_rng(23)
    system, lasers = random_driven_system(rng)
    g0, d1, d2 = build_generator_parts(system, lasers)
    det1 = rng.uniform(-2000, 2000, size=300)
    det2 = rng.uniform(-2000, 2000, size=300)
    try:
        set_backend("kernel")
        a = solver.fluorescence_batch(g0, d1, d2, det1, det2)
        set_backend("numpy")
        b = solver.fluorescence_batch(g0, d1, d2, det1, det2)
    finally:
        set_backend(None)
    assert np.max(np.abs(a - b)) < 1e-12


def test_steady_state_check_rejects_bad_matrices():
    from tcspin.lindblad import SteadyState

    bad_trace = SteadyState(rho=np.eye(4, dtype=complex), fluorescence=0.0)
    with pytest.raises(ValueError):
        bad_trace.check()
    not_herm = np.diag([1.0, 0.0, 0.0, 0.0]).astype(complex)
    not_herm[0, 1] = 1e-3
    with pytest.raises(ValueError):
        SteadyState(rho=not_herm, fluorescence=0.0).check()
