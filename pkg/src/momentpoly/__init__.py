"""Exact moment-polytope computation for 3-tensors.

The package computes Borel and moment polytopes of rational 3-tensors from
their supports: candidate facet inequalities are enumerated combinatorially,
each candidate is decided by the consistency of a polynomial system (reduced
Groebner bases over Q, F_q, or a rational function field), the resulting
half-spaces are intersected exactly, and membership of every vertex is
certified by tensor scaling.
"""

__version__ = "0.1.0"
