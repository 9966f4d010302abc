"""kzdyn: exact computer algebra for trigonometric KZ / dynamical difference
operators in type A, with hypergeometric-integral and Selberg verification
suites.

Modules
-------
symexpr   exact multivariate rational functions over Q
roots     type-A positive roots, normal orders, Weyl combinatorics
uea       PBW monomials, straightening, basis changes, (anti)automorphisms
rep       Verma/tensor weight spaces, Shapovalov form, dual actions
dyn       dynamical difference operators, fusion matrix, KZ compatibility
hyper     hypergeometric weight functions and their identities
numeric   Selberg integrals, quadrature, floating-point checks
cli       the ``kzdyn`` command-line verification harness
"""

from __future__ import annotations

__version__ = "0.1.0"
