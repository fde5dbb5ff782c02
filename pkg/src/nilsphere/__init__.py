"""nilsphere: numerical machinery for locating common fixed points of
finitely generated groups of near-identity C1 diffeomorphisms of the
2-sphere -- orbit curves, enclosed disks, C1-norm neighborhoods, and the
nested-disk fixed-point search, plus an exact finite-group oracle for the
underlying commutator algebra.
"""

__version__ = "0.1.0"
