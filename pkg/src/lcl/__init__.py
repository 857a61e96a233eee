"""Numerical laboratory for the spatially homogeneous Landau-Coulomb equation.

Subpackages cover the collision kernels and their regularity bounds, the
Osgood/Gronwall envelope machinery, numerical oracles for the singular
integral inequalities, exact Wasserstein-2 transport between particle
ensembles, the interacting-particle simulator with coupled two-system
experiments, conservation and weak-form diagnostics, and a reproducible
experiment CLI.
"""

__version__ = "0.1.0"
