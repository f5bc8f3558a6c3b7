"""Residually reducible ordinary Galois representations: classification,
analytic Iwasawa invariants from Mazur-Tate elements, refined mu-invariants
of Iwasawa modules, and a finite-group laboratory for one-step deformation
lifting."""

__version__ = "0.1.0"
