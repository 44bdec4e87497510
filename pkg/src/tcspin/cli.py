"""Command-line front end.

Subcommands: zeeman, lineshape, simulate, synth, fit, budget, analyze.
Every run loads a TOML config, executes one command and writes a JSON
report (command echo, resolved config, outputs, version) plus any data
files into the output directory. With a fixed seed, data files and
reports are byte-identical across runs.

Magnetic fields appear in configs as millitesla (b0_mt), spectral
diffusion as a Gaussian HWHM in MHz (sd_hwhm_mhz); rates and Rabi
frequencies are angular (2*pi*MHz) as everywhere in the package.
"""

import argparse
import json
import pathlib
import sys

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import __version__
from . import fitkit, io, photonics, specanalysis
from .constants import G_E_BULK, GAMMA_DECAY_BULK
from .lineshape import (
    DiffusionKernel,
    TwoLevelParams,
    diffused_saturation,
    lorentzian_fwhm,
    saturation_rabi,
)
from .lindblad import single_laser_scan, two_colour_map
from .spinmodel import (
    ZeemanModel,
    ad_splitting,
    bc_splitting,
    transition_detunings,
)

# Config-facing parameter names -> fitkit names (b0 converted mT <-> T).
_CFG_TO_FIT = {
    "b0_mt": "b0",
    "g_h": "g_h",
    "sd_hwhm_mhz": "gamma_sd",
    "omega1": "omega1",
    "omega2": "omega2",
    "r": "r",
    "p": "p",
    "gamma": "gamma",
}
_FIT_TO_CFG = {v: k for k, v in _CFG_TO_FIT.items()}


class CommandError(Exception):
    """Config or data problem attributable to the invocation."""


def _model_params(block):
    missing = [k for k in _CFG_TO_FIT if k not in block]
    if missing:
        raise CommandError(f"params block missing {missing}")
    params = {}
    for cfg_name, fit_name in _CFG_TO_FIT.items():
        value = float(block[cfg_name])
        params[fit_name] = value * 1e-3 if cfg_name == "b0_mt" else value
    return params


def _cfg_values(params):
    out = {}
    for fit_name, value in params.items():
        cfg_name = _FIT_TO_CFG[fit_name]
        out[cfg_name] = value * 1e3 if fit_name == "b0" else value
    return out


def _grid(block):
    start, stop, step = (float(block[k]) for k in ("start_mhz", "stop_mhz", "step_mhz"))
    if step <= 0 or stop <= start:
        raise CommandError("grid needs step_mhz > 0 and stop_mhz > start_mhz")
    return np.arange(start, stop + 0.5 * step, step)


def _constants(config):
    block = config.get("constants", {})
    return {
        "g_e": float(block.get("g_e", G_E_BULK)),
        "gamma_decay": float(block.get("gamma_decay", GAMMA_DECAY_BULK)),
        "tau_bulk_ns": float(block.get("tau_bulk_ns", 940.0)),
    }


def _require(config, section):
    if section not in config:
        raise CommandError(f"config is missing the [{section}] section")
    return config[section]


def _zeeman_model(block, g_e):
    return ZeemanModel(
        b0_tesla=float(block["b0_mt"]) * 1e-3, g_e=g_e, g_h=float(block["g_h"])
    )


def cmd_zeeman(config, out_dir, seed, plot):
    consts = _constants(config)
    block = _require(config, "zeeman")
    model = _zeeman_model(block, consts["g_e"])
    tset = transition_detunings(model)
    return {
        "detunings_ghz": {k: v * 1e-3 for k, v in tset.detunings.items()},
        "bc_splitting_ghz": bc_splitting(model),
        "ad_splitting_ghz": ad_splitting(model),
    }


def cmd_lineshape(config, out_dir, seed, plot):
    consts = _constants(config)
    block = _require(config, "lineshape")
    params = TwoLevelParams(
        gamma_decay=consts["gamma_decay"],
        gamma_dephase=float(block["gamma_dephase"]),
    )
    omega_s = saturation_rabi(params)
    outputs = {
        "gamma_total": params.gamma_total,
        "saturation_rabi": omega_s,
        "fwhm_mhz_low_power": lorentzian_fwhm(params, 0.0),
        "fwhm_mhz_at_saturation": lorentzian_fwhm(params, omega_s),
    }
    if "rabi" in block:
        outputs["fwhm_mhz_at_rabi"] = lorentzian_fwhm(params, float(block["rabi"]))
    sd = float(block.get("sd_hwhm_mhz", 0.0))
    if sd > 0:
        omega_sp, fwhm = diffused_saturation(params, DiffusionKernel(hwhm=sd))
        outputs["diffused"] = {
            "saturation_rabi": omega_sp,
            "fwhm_ghz": fwhm * 1e-3,
        }
    return outputs


def _scan_configs(block, grid, system_detunings):
    """fitkit.ScanConfig list from the [*.scans] array of tables."""
    configs = []
    for scan in block:
        kind = scan["kind"]
        label = scan.get("label") or kind
        if kind == "single":
            configs.append(
                fitkit.ScanConfig(
                    kind="single",
                    probe_grid=grid,
                    pump_laser=int(scan.get("pump_laser", 1)),
                    label=label,
                )
            )
            continue
        if "pump_detuning_mhz" in scan:
            pump_det = float(scan["pump_detuning_mhz"])
        elif "pump" in scan:
            pump_det = system_detunings[scan["pump"]]
        else:
            raise CommandError(f"scan {label!r} needs pump or pump_detuning_mhz")
        configs.append(
            fitkit.ScanConfig(
                kind="pump_probe",
                probe_grid=grid,
                pump_detuning=pump_det,
                pump_laser=int(scan.get("pump_laser", 1)),
                label=label,
            )
        )
    labels = [c.label for c in configs]
    if len(set(labels)) != len(labels):
        raise CommandError("scan labels must be unique")
    return configs


def cmd_simulate(config, out_dir, seed, plot):
    consts = _constants(config)
    block = _require(config, "simulate")
    params = _model_params(block["params"])
    system = fitkit.build_system(
        params, g_e=consts["g_e"], gamma_decay=consts["gamma_decay"]
    )
    mode = block["mode"]
    grid = _grid(block["grid"])
    files = []
    outputs = {"mode": mode, "transition_detunings_ghz": {
        k: v * 1e-3 for k, v in system.transition_detunings().items()}}

    if mode == "single":
        spec = single_laser_scan(system, grid, params["omega1"])
        files.append(_write_spectrum(out_dir, "single.csv", spec, plot))
    elif mode == "pump_probe":
        det = system.transition_detunings()
        scan = _scan_configs([block["pump_probe"]], grid, det)[0]
        counts = fitkit.evaluate_scan(
            params, scan, g_e=consts["g_e"], gamma_decay=consts["gamma_decay"]
        )
        spec = io.Spectrum1D(axis=grid * 1e-3, counts=counts)
        files.append(_write_spectrum(out_dir, f"{scan.label}.csv", spec, plot))
    elif mode == "map":
        grid2 = _grid(block["grid2"]) if "grid2" in block else grid
        fmap = two_colour_map(
            system, grid, params["omega1"], grid2, params["omega2"]
        )
        path = out_dir / "map.csv"
        io.write_map(path, fmap)
        files.append(path.name)
        if plot:
            _plot_map(out_dir / "map.svg", fmap)
            files.append("map.svg")
    else:
        raise CommandError(f"unknown simulate mode {mode!r}")
    outputs["files"] = files
    return outputs


def _write_spectrum(out_dir, name, spec, plot):
    io.write_spectrum(out_dir / name, spec)
    if plot:
        _plot_spectrum(out_dir / (pathlib.Path(name).stem + ".svg"), spec)
    return name


def cmd_synth(config, out_dir, seed, plot):
    consts = _constants(config)
    block = _require(config, "synth")
    if seed is None:
        raise CommandError("synth is stochastic: a seed is required")
    params = _model_params(block["params"])
    grid = _grid(block["grid"])
    det = fitkit.build_system(
        params, g_e=consts["g_e"], gamma_decay=consts["gamma_decay"]
    ).transition_detunings()
    configs = _scan_configs(block["scans"], grid, det)
    datasets, scale = fitkit.synthesize(
        params,
        configs,
        seed=seed,
        dwell_s=float(block.get("dwell_s", 1.0)),
        peak_rate=float(block.get("peak_rate_cps", 0.0)),
        g_e=consts["g_e"],
        gamma_decay=consts["gamma_decay"],
    )
    manifest = {"scale": scale, "dwell_s": float(block.get("dwell_s", 1.0)),
                "scans": []}
    files = []
    for scan, spectrum in datasets:
        name = f"{scan.label}.csv"
        io.write_spectrum(out_dir / name, spectrum)
        files.append(name)
        manifest["scans"].append(
            {
                "label": scan.label,
                "file": name,
                "kind": scan.kind,
                "pump_detuning_mhz": scan.pump_detuning,
                "pump_laser": scan.pump_laser,
            }
        )
        if plot:
            _plot_spectrum(out_dir / f"{scan.label}.svg", spectrum)
    _dump_json(out_dir / "manifest.json", manifest)
    return {"files": files, "manifest": "manifest.json", "scale": scale}


def cmd_fit(config, out_dir, seed, plot):
    consts = _constants(config)
    block = _require(config, "fit")
    manifest_path = pathlib.Path(block["data_manifest"])
    if not manifest_path.exists():
        raise CommandError(f"missing data manifest {manifest_path}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)

    data_dir = manifest_path.parent
    datasets = []
    for scan in manifest["scans"]:
        path = data_dir / scan["file"]
        if not path.exists():
            raise CommandError(f"missing dataset file {path}")
        spectrum = io.read_spectrum(path)
        configs = fitkit.ScanConfig(
            kind=scan["kind"],
            probe_grid=spectrum.axis * 1e3,
            pump_detuning=float(scan["pump_detuning_mhz"]),
            pump_laser=int(scan["pump_laser"]),
            normalization=float(manifest["scale"]),
            label=scan["label"],
        )
        datasets.append((configs, spectrum))

    free_cfg = list(block["free"])
    fixed_cfg = dict(block.get("fixed", {}))
    initial_cfg = dict(block["initial"])
    free = tuple(_CFG_TO_FIT[name] for name in free_cfg)
    fixed = {
        _CFG_TO_FIT[k]: float(v) * (1e-3 if k == "b0_mt" else 1.0)
        for k, v in fixed_cfg.items()
    }
    initial = {
        _CFG_TO_FIT[k]: float(v) * (1e-3 if k == "b0_mt" else 1.0)
        for k, v in initial_cfg.items()
    }

    problem = fitkit.FitProblem(
        datasets=datasets,
        free_params=free,
        fixed_params=fixed,
        g_e=consts["g_e"],
        gamma_decay=consts["gamma_decay"],
    )
    result = fitkit.fit(problem, initial)

    outputs = {
        "values": _cfg_values(result.values),
        "sigmas": _cfg_values(
            {k: result.sigmas.get(k, 0.0) for k in result.values}
        ),
        "free": free_cfg,
        "fixed": sorted(fixed_cfg),
        "converged": result.converged,
        "message": result.message,
        "reduced_chi2": result.reduced_chi2,
        "n_evaluations": result.n_evaluations,
    }
    if not result.converged:
        outputs["error"] = f"fit did not converge: {result.message}"
    _dump_json(out_dir / "fit_result.json", outputs)
    outputs["files"] = ["fit_result.json"]
    return outputs


def cmd_budget(config, out_dir, seed, plot):
    consts = _constants(config)
    block = _require(config, "budget")
    table = (
        photonics.RelativeIntensityTable.load(block["table"])
        if "table" in block
        else photonics.load_default_table()
    )
    spectrum = (
        photonics.EmitterSpectrum.load(block["spectrum"])
        if "spectrum" in block
        else photonics.load_default_spectrum()
    )
    chain = photonics.EfficiencyChain(**block.get("chain", {}))
    radius = float(block.get("radius_nm", 305.0))

    bands = {}
    for band in block.get("bands_nm", []):
        key = f"{band[0]:g}-{band[1]:g}"
        bands[key] = photonics.band_integral(table, spectrum, band, radius)
    pw = photonics.weighted_purcell(table, spectrum, radius)

    outputs = {"band_integrals": bands, "weighted_purcell": pw, "radius_nm": radius}
    if "rate_band_nm" in block:
        band_ir = photonics.band_integral(
            table, spectrum, block["rate_band_nm"], radius
        )
        expected = photonics.expected_count_rate(
            consts["tau_bulk_ns"], band_ir, chain
        )
        outputs["expected_cps"] = expected
        if "measured_cps" in block:
            measured = float(block["measured_cps"])
            outputs["loss_corrected_cps"] = photonics.loss_correct(measured, chain)
            outputs["discrepancy_factor"] = photonics.discrepancy_factor(
                expected, measured
            )
    if "lifetime" in block:
        lt = block["lifetime"]
        model = photonics.LifetimeModel(
            bulk_lifetime_ns=consts["tau_bulk_ns"],
            weighted_purcell=float(lt.get("weighted_purcell", pw)),
            radiative_efficiency=float(lt["radiative_efficiency"]),
        )
        outputs["lifetime_ratio"] = photonics.lifetime_ratio(model)
    return outputs


def cmd_analyze(config, out_dir, seed, plot):
    block = _require(config, "analyze")
    outputs = {}

    if "spectra" in block:
        model = block.get("peak_model", "lorentzian")
        min_prom = block.get("min_prominence")
        fits_by_device = []
        for path in block["spectra"]:
            if not pathlib.Path(path).exists():
                raise CommandError(f"missing spectrum file {path}")
            spectrum = io.read_spectrum(path)
            fits = []
            for cand in specanalysis.find_peaks(spectrum, min_prominence=min_prom):
                half = float(block.get("fit_halfwidth", 2.0))
                window = (cand.position - half, cand.position + half)
                try:
                    fit = specanalysis.fit_peak(spectrum, window, model)
                except (RuntimeError, ValueError):
                    continue  # unfittable candidate, counted as no peak
                # noise ripple on a broad line yields several candidates
                # that converge to the same fitted peak; keep one
                if any(abs(fit.center - f.center) < 0.5 * f.fwhm for f in fits):
                    continue
                fits.append(fit)
            fits_by_device.append(fits)
        stats = specanalysis.survey_stats(
            fits_by_device,
            position_bin_width=float(block.get("position_bin", 1.0)),
            linewidth_bin_width=float(block.get("linewidth_bin", 0.25)),
        )
        outputs["survey"] = {
            "n_devices": len(fits_by_device),
            "n_peaks": int(stats.positions.size),
            "median_linewidth": stats.median_linewidth,
            "mean_peaks_per_device": stats.mean_peaks_per_device,
            "position_spread_fwhm": stats.position_spread_fwhm,
        }
        _dump_json(
            out_dir / "survey.json",
            {
                "positions": stats.positions.tolist(),
                "linewidths": stats.linewidths.tolist(),
                "peaks_per_device": stats.peaks_per_device.tolist(),
            },
        )
        outputs["files"] = ["survey.json"]

    if "transient" in block:
        tr = block["transient"]
        time_ns, counts = io.read_transient(tr["file"])
        trace = specanalysis.TransientTrace(
            time_ns=time_ns, counts=counts, off_time_ns=float(tr.get("off_time_ns", 0))
        )
        tau, sigma_tau, baseline = specanalysis.fit_lifetime(
            trace, tuple(tr["window_ns"])
        )
        outputs["lifetime"] = {
            "tau_ns": tau,
            "sigma_tau_ns": sigma_tau,
            "baseline": baseline,
        }

    if "thermometry" in block:
        th = block["thermometry"]
        outputs["temperature_k"] = specanalysis.temperature_from_ratio(
            float(th["ratio"]), float(th["delta_e_mev"]), float(th["calib_g"])
        )

    if not outputs:
        raise CommandError("[analyze] has nothing to do")
    return outputs


def _plot_spectrum(path, spectrum):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(spectrum.axis, spectrum.counts, lw=0.9)
    ax.set_xlabel(f"detuning ({spectrum.axis_unit})")
    ax.set_ylabel("counts")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _plot_map(path, fmap):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    mesh = ax.pcolormesh(fmap.axis2, fmap.axis1, fmap.counts, shading="nearest")
    fig.colorbar(mesh, ax=ax, label="fluorescence")
    ax.set_xlabel("laser 2 detuning (GHz)")
    ax.set_ylabel("laser 1 detuning (GHz)")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _dump_json(path, obj):
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


_COMMANDS = {
    "zeeman": cmd_zeeman,
    "lineshape": cmd_lineshape,
    "simulate": cmd_simulate,
    "synth": cmd_synth,
    "fit": cmd_fit,
    "budget": cmd_budget,
    "analyze": cmd_analyze,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="tcspin",
        description="Spin-dependent optical spectroscopy toolkit",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="TOML config file")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed override")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--plot", action="store_true", help="emit SVG plots")
    args = parser.parse_args(argv)

    try:
        with open(args.config, "rb") as fh:
            config = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        print(f"error: cannot load config: {exc}", file=sys.stderr)
        return 2

    out_dir = pathlib.Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else config.get("seed")

    report = {
        "command": args.command,
        "config": config,
        "outputs": {},
        "version": __version__,
    }
    try:
        report["outputs"] = _COMMANDS[args.command](config, out_dir, seed, args.plot)
    except (CommandError, ValueError, KeyError, OSError) as exc:
        report["outputs"] = {"error": f"{type(exc).__name__}: {exc}"}
    status = 1 if "error" in report["outputs"] else 0

    _dump_json(out_dir / "report.json", report)
    print(json.dumps(report, indent=2, sort_keys=True))
    return status


if __name__ == "__main__":
    sys.exit(main())
