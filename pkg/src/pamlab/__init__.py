"""Desk-scale numerical laboratory for random Schroedinger operators of
Anderson type on periodic lattices.

The package is organised around a small set of building blocks:

- ``lattice``: periodic grids, FFT convolution, spectral derivatives, weights
- ``noise``: white-noise sampling, mollifiers, lattice shifts
- ``enhanced2d``: 2D driver/enhancement pairs, their renormalization constant,
  Cameron-Martin style shifts and the resonance fixed point
- ``renorm3d``: the two 3D renormalization constants (quadrature + Monte Carlo)
- ``norms``: weighted L2 norms and multiscale negative-regularity estimators
- ``pam``: exponential integrators for the parabolic evolutions (the semigroup)
- ``spectral``: discrete Hamiltonians, spectral measures, Weyl probes, spectrum
  statistics
- ``experiments`` / ``cli``: a configuration-driven, manifest-producing runner
"""

__version__ = "0.1.0"
