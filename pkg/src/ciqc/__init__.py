"""Exact computation of quantum cohomology data for Fano complete intersections.

The package reproduces, in exact rational arithmetic, the small quantum
cohomology of Fano complete intersections in projective space, the monodromy
reduction of the WDVV system, the reconstruction of the generating data for
primitive-class invariants, the genus-one determination of the four-point
primitive invariant for cubics, and the Schubert-calculus model of the
cohomology ring of the Fano variety of lines.
"""

__version__ = "0.1.0"
