"""Simulation toolkit for canonical-phase measurements of weak optical fields.

The package models a four-detector multiport interferometer that projects an
unknown weak field onto truncated phase states, turning joint photocount
statistics into samples of the canonical phase distribution.  It covers state
construction in the photon-number basis (`fock`), linear-optical networks and
exact Fock-space evolution (`optics`), the phase mathematics (`phase`),
photodetector imperfections (`detector`), end-to-end measurement simulation
(`experiment`) and a command-line front end (`cli`).
"""

__version__ = "0.1.0"
