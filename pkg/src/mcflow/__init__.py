"""Exact verifier for 3D flows carried by an sl(2) frame.

The package computes the Jacobi last multiplier, the dual one-form frame
and the vector potential of a 3D dynamical system with given companion
fields, and checks every structural identity (brackets, structure
equations, duality, curl and divergence identities, integrability,
conformal invariance, bi-Hamiltonian decomposition) as an exact zero
residual, cross-validated by a floating-point oracle.
"""

__version__ = "0.1.0"
