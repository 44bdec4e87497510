"""Frequency-indexed record containers shared by simulation and analysis."""

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass
class Spectrum1D:
    """One spectrum: axis values (GHz detuning or nm wavelength) + counts.

    Simulated spectra store model fluorescence (excited population) in
    `counts` with dwell_s = None; measured or synthesized data store
    photon counts with the dwell time used per point.
    """

    axis: np.ndarray
    counts: np.ndarray
    axis_unit: str = "GHz"
    dwell_s: Optional[float] = None

    def __post_init__(self):
        self.axis = np.asarray(self.axis, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        if self.axis.shape != self.counts.shape:
            raise ValueError("axis and counts must have the same shape")
        d = np.diff(self.axis)
        if len(d) and not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("axis must be strictly monotone")
        if np.any(self.counts < 0):
            raise ValueError("counts must be >= 0")


@dataclass
class Map2D:
    """Two-colour map: counts on the outer product of two detuning axes."""

    axis1: np.ndarray
    axis2: np.ndarray
    counts: np.ndarray  # shape (len(axis1), len(axis2))
    axis_unit: str = "GHz"

    def __post_init__(self):
        self.axis1 = np.asarray(self.axis1, dtype=float)
        self.axis2 = np.asarray(self.axis2, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        if self.counts.shape != (len(self.axis1), len(self.axis2)):
            raise ValueError("counts shape must match the two axes")
