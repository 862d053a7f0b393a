"""screenalg: screening-operator algebra toolkit for deformed W_n.

Subpackages:
  rootsys  - exact sl_n root-system and Weyl-group data
  orbit    - affine Weyl orbits, admissible edges, commuting squares, signs
  theta    - numerical theta function, q-Pochhammer products, couplings
  starprod - symmetrized star-products and screening-kernel verification
  qshuffle - exact q-shuffle algebra of the conformal limit
  cli      - command-line verification harness
"""

__version__ = "0.1.0"
