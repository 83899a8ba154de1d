"""
signcorr - sign correlation laboratory for eigenfunction families.

Computes sign-correlation limits analytically (torus-average closed forms)
and empirically (Hermite, Laguerre and Chebyshev families, numerically
solved Schrodinger eigenfunctions).
"""

__version__ = "1.0.0"
