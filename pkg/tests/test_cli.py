"""Command-line interface: reports, data files, determinism and errors."""

import json

import numpy as np
import pytest

from tcspin import io
from tcspin.cli import main
from tcspin.spectra import Map2D, Spectrum1D


def run_cli(tmp_path, command, config_text, out="out", seed=None, cwd_files=()):
    cfg = tmp_path / "config.toml"
    cfg.write_text(config_text)
    argv = [command, "--config", str(cfg), "--out", str(tmp_path / out)]
    if seed is not None:
        argv += ["--seed", str(seed)]
    status = main(argv)
    report = json.loads((tmp_path / out / "report.json").read_text())
    return status, report


ZEEMAN_CFG = """
[zeeman]
b0_mt = 88.1
g_h = 2.76
"""

LINESHAPE_CFG = """
[lineshape]
gamma_dephase = 127.415
sd_hwhm_mhz = 500.0
"""

BUDGET_CFG = """
[budget]
radius_nm = 305.0
bands_nm = [[1330.0, 1600.0]]
rate_band_nm = [1350.0, 1600.0]
measured_cps = 70.0
"""

PARAMS_BLOCK = """
b0_mt = 88.1
g_h = 2.76
sd_hwhm_mhz = 400.0
omega1 = 10.0
omega2 = 14.0
r = 1.2
p = 2.9
gamma = 127.415
"""

SYNTH_CFG = f"""
[synth]
dwell_s = 1.0
peak_rate_cps = 0.0
[synth.params]
{PARAMS_BLOCK}
[synth.grid]
start_mhz = -3400.0
stop_mhz = 3400.0
step_mhz = 400.0
[[synth.scans]]
kind = "pump_probe"
pump = "A"
label = "pump_A"
[[synth.scans]]
kind = "single"
pump_laser = 2
label = "single"
"""

FIT_CFG = (
    SYNTH_CFG
    + """
[fit]
data_manifest = "synth/manifest.json"
free = ["b0_mt", "g_h"]
[fit.fixed]
sd_hwhm_mhz = 400.0
omega1 = 10.0
omega2 = 14.0
r = 1.2
p = 2.9
gamma = 127.415
[fit.initial]
b0_mt = 89.5
g_h = 2.70
"""
)


def test_zeeman_report(tmp_path):
    status, report = run_cli(tmp_path, "zeeman", ZEEMAN_CFG)
    assert status == 0
    out = report["outputs"]
    assert out["bc_splitting_ghz"] == pytest.approx(0.931, abs=1e-3)
    assert out["detunings_ghz"]["A"] == pytest.approx(-2.938, abs=1e-3)
    assert report["command"] == "zeeman"
    assert "version" in report


def test_zeeman_zero_field(tmp_path):
    cfg = "[zeeman]\nb0_mt = 0.0\ng_h = 2.76\n"
    status, report = run_cli(tmp_path, "zeeman", cfg)
    assert status == 0
    assert all(v == 0.0 for v in report["outputs"]["detunings_ghz"].values())


def test_lineshape_report(tmp_path):
    status, report = run_cli(tmp_path, "lineshape", LINESHAPE_CFG)
    assert status == 0
    out = report["outputs"]
    assert out["fwhm_mhz_at_saturation"] == pytest.approx(361.0, abs=1.0)
    assert out["fwhm_mhz_low_power"] == pytest.approx(255.0, abs=0.5)
    assert out["diffused"]["fwhm_ghz"] == pytest.approx(1.41, abs=0.02)
    assert out["diffused"]["saturation_rabi"] == pytest.approx(11.4, abs=0.2)


def test_budget_report(tmp_path):
    status, report = run_cli(tmp_path, "budget", BUDGET_CFG)
    assert status == 0
    out = report["outputs"]
    assert out["band_integrals"]["1330-1600"] == pytest.approx(0.153, abs=0.002)
    assert out["expected_cps"] == pytest.approx(2500.0, abs=100.0)
    assert out["loss_corrected_cps"] == pytest.approx(2140.0, abs=10.0)
    assert out["discrepancy_factor"] == pytest.approx(36.0, abs=2.0)


def test_simulate_single_writes_spectrum(tmp_path):
    cfg = f"""
[simulate]
mode = "single"
[simulate.params]
{PARAMS_BLOCK}
[simulate.grid]
start_mhz = -3000.0
stop_mhz = 3000.0
step_mhz = 500.0
"""
    status, report = run_cli(tmp_path, "simulate", cfg)
    assert status == 0
    spec = io.read_spectrum(tmp_path / "out" / report["outputs"]["files"][0])
    assert spec.axis.size == 13
    assert np.all(spec.counts >= 0)


def test_synth_requires_seed(tmp_path):
    status, report = run_cli(tmp_path, "synth", SYNTH_CFG)
    assert status == 1
    assert "seed" in report["outputs"]["error"]


def test_synth_and_fit_round_trip(tmp_path):
    status, report = run_cli(tmp_path, "synth", SYNTH_CFG, out="synth", seed=5)
    assert status == 0
    assert set(report["outputs"]["files"]) == {"pump_A.csv", "single.csv"}

    # run the fit from the directory holding the manifest path in the config
    import os

    cwd = os.getcwd()
    os.chdir(tmp_path)
    try:
        status, report = run_cli(tmp_path, "fit", FIT_CFG, out="fit")
    finally:
        os.chdir(cwd)
    assert status == 0
    values = report["outputs"]["values"]
    assert values["b0_mt"] == pytest.approx(88.1, abs=0.01)
    assert values["g_h"] == pytest.approx(2.76, abs=0.001)
    assert report["outputs"]["fixed"] == sorted(
        ["sd_hwhm_mhz", "omega1", "omega2", "r", "p", "gamma"]
    )
    result_file = json.loads((tmp_path / "fit" / "fit_result.json").read_text())
    assert result_file["converged"]


def test_missing_dataset_flagged(tmp_path):
    import os

    cwd = os.getcwd()
    os.chdir(tmp_path)
    try:
        status, report = run_cli(tmp_path, "fit", FIT_CFG, out="fit")
    finally:
        os.chdir(cwd)
    assert status == 1
    assert "manifest" in report["outputs"]["error"]


def test_missing_config_section(tmp_path):
    status, report = run_cli(tmp_path, "zeeman", "[lineshape]\ngamma_dephase = 1.0\n")
    assert status == 1
    assert "zeeman" in report["outputs"]["error"]


def test_report_config_echo_reproduces(tmp_path):
    """Re-running from the echoed config gives the same outputs."""
    status, report = run_cli(tmp_path, "zeeman", ZEEMAN_CFG)
    echo = report["config"]
    cfg2 = "[zeeman]\n" + "\n".join(
        f"{k} = {v}" for k, v in echo["zeeman"].items()
    )
    status2, report2 = run_cli(tmp_path, "zeeman", cfg2, out="out2")
    assert report2["outputs"] == report["outputs"]


def test_spectrum_file_round_trip(tmp_path):
    spec = Spectrum1D(
        axis=np.linspace(-2.0, 2.0, 9), counts=np.arange(9.0), axis_unit="GHz"
    )
    path = tmp_path / "s.csv"
    io.write_spectrum(path, spec)
    back = io.read_spectrum(path)
    assert np.array_equal(back.axis, spec.axis)
    assert np.array_equal(back.counts, spec.counts)
    assert back.axis_unit == "GHz"


def test_map_file_round_trip(tmp_path):
    m = Map2D(
        axis1=np.array([0.0, 1.0]),
        axis2=np.array([0.0, 0.5, 1.0]),
        counts=np.arange(6.0).reshape(2, 3),
    )
    path = tmp_path / "m.csv"
    io.write_map(path, m)
    back = io.read_map(path)
    assert np.array_equal(back.counts, m.counts)
    assert np.array_equal(back.axis2, m.axis2)


def test_transient_file_round_trip(tmp_path):
    t = np.arange(0.0, 100.0, 4.0)
    c = np.exp(-t / 30.0) * 100
    path = tmp_path / "t.csv"
    io.write_transient(path, t, c)
    t2, c2 = io.read_transient(path)
    assert np.array_equal(t, t2)
    assert np.array_equal(c, c2)


def test_bad_header_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("foo,bar\n1,2\n")
    with pytest.raises(ValueError):
        io.read_spectrum(path)
