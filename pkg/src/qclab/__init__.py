"""Numerical quasiconformal extremal problems: Beltrami solver, Grunsky
operators, pairing functionals and degeneration along substantial points."""

__version__ = "0.1.0"
