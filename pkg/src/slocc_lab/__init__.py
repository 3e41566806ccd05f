"""Entanglement of identical photons by spatially localized measurements.

Submodules:

* ``qmath`` - Pauli basis, tensor products, Hermitian eigen-solver, PSD square root
* ``particles`` - no-label two-particle states, indistinguishability, sLOCC projection
* ``optics`` - wave plates, the distribution setup, HOM dip/peak fitting
* ``metrics`` - concurrence, entanglement of formation, fidelity, CHSH
* ``measurement`` - analyzer settings, Poisson counts, decoherence at detection
* ``tomography`` - state and process reconstruction, bootstrap error bars
* ``teleport`` - Bell measurement, correction, classical-bound check
* ``experiments`` / ``cli`` - data-file generation for every experiment
"""

__version__ = "0.1.0"
