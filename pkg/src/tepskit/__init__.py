"""tepskit: elastic-scattering phase shifts from real-time evolution.

Subpackages cover the radial bases and Hamiltonians, wave/detector
construction, unitary propagation, phase-shift extraction (plateau and
variational scans), a Numerov oracle, a gate-level circuit emulator, and
a CLI harness with an experiment registry.
"""

__version__ = "0.1.0"
