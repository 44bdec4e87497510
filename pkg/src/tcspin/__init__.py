"""tcspin: simulation, fitting and analysis of spin-dependent optical
spectroscopy of single solid-state emitters."""

__version__ = "0.1.0"
