"""Numerical machinery for locally covariant free fields.

Subpackages are plain modules, one per topic:

``dirac_algebra``
    Cl(1,3), gamma matrices, intertwiners, adjoint and conjugation matrices.
``spin_group``
    The double cover of the Lorentz group and lifts of Lorentz matrices.
``frame_geometry``
    Vierbeins, spin connections, Dirac operators on grid fields and their
    metric variation.
``quantum_algebras``
    Weyl words, quasi-free combinatorics and finite CAR algebras.
``field_solutions``
    Mass-shell quadrature in Minkowski space and a 1+1 lattice Klein-Gordon
    engine.
``microlocal_cones``
    Causal classification of covectors, the Gamma_n cones and a wave front
    scanner.
``causal_lattice``
    Lattice causal futures, domains of dependence and metric deformation.
``cli``
    Command line driver for the verification suites.
"""

__version__ = "0.1.0"
