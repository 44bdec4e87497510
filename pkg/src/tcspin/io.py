"""Delimited-text readers and writers for spectra, transients and maps.

Headers carry the units: `frequency_ghz,counts` (excitation scans),
`wavelength_nm,counts` (emission spectra), `time_ns,counts` (lifetime
transients) and `f1_ghz,f2_ghz,counts` (two-colour maps). Floats are
written with repr-roundtrip precision so identical arrays always produce
identical bytes.
"""

import numpy as np

from .spectra import Map2D, Spectrum1D

_AXIS_HEADERS = {"frequency_ghz": "GHz", "wavelength_nm": "nm"}
_FMT = "%.17g"


def _read_named(path):
    raw = np.genfromtxt(path, delimiter=",", names=True)
    if raw.dtype.names is None:
        raise ValueError(f"{path}: missing header row")
    return np.atleast_1d(raw)


def read_spectrum(path) -> Spectrum1D:
    raw = _read_named(path)
    names = raw.dtype.names
    axis_col = next((n for n in names if n in _AXIS_HEADERS), None)
    if axis_col is None or "counts" not in names:
        raise ValueError(f"{path}: expected frequency_ghz|wavelength_nm,counts")
    return Spectrum1D(
        axis=raw[axis_col], counts=raw["counts"], axis_unit=_AXIS_HEADERS[axis_col]
    )


def write_spectrum(path, spectrum: Spectrum1D):
    header = {v: k for k, v in _AXIS_HEADERS.items()}[spectrum.axis_unit]
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{header},counts\n")
        for x, c in zip(spectrum.axis, spectrum.counts):
            fh.write(f"{_FMT % x},{_FMT % c}\n")


def read_transient(path):
    """(time_ns, counts) arrays from a lifetime-transient file."""
    raw = _read_named(path)
    if set(raw.dtype.names) < {"time_ns", "counts"}:
        raise ValueError(f"{path}: expected time_ns,counts")
    return raw["time_ns"], raw["counts"]


def write_transient(path, time_ns, counts):
    with open(path, "w", newline="\n") as fh:
        fh.write("time_ns,counts\n")
        for t, c in zip(time_ns, counts):
            fh.write(f"{_FMT % t},{_FMT % c}\n")


def read_map(path) -> Map2D:
    raw = _read_named(path)
    if set(raw.dtype.names) < {"f1_ghz", "f2_ghz", "counts"}:
        raise ValueError(f"{path}: expected f1_ghz,f2_ghz,counts")
    ax1 = np.unique(raw["f1_ghz"])
    ax2 = np.unique(raw["f2_ghz"])
    if raw.size != ax1.size * ax2.size:
        raise ValueError(f"{path}: rows do not form a full grid")
    return Map2D(axis1=ax1, axis2=ax2, counts=raw["counts"].reshape(ax1.size, ax2.size))


def write_map(path, grid_map: Map2D):
    with open(path, "w", newline="\n") as fh:
        fh.write("f1_ghz,f2_ghz,counts\n")
        for i, f1 in enumerate(grid_map.axis1):
            for j, f2 in enumerate(grid_map.axis2):
                fh.write(f"{_FMT % f1},{_FMT % f2},{_FMT % grid_map.counts[i, j]}\n")
