"""Numerical verification of Bott chains of complex structures.

Modules
-------
algebra
    Quaternion matrices, classical groups, exponentials, logarithms,
    bi-invariant distances and Pfaffians.
chains
    Clifford systems and the SO, U and Sp chains of iterated centrioles.
inclusions
    Standard inclusions, involutions, fixed-point and commuting-square
    checks, block normal forms and metric scales.
homotopy
    Stable homotopy tables and exact-sequence reasoning.
cli
    Command-line runner for the verification suites.
"""
from .algebra import QuatMatrix, geodesic_distance, pfaffian_sign
from .chains import build_chain, chain_distance_profile, make_clifford_system

__all__ = ["QuatMatrix", "geodesic_distance", "pfaffian_sign", "build_chain",
           "chain_distance_profile", "make_clifford_system"]
__version__ = "0.1.0"
