"""Joint spectral radius normal forms: entry normalization, shady norms and submatrix bounds."""

__version__ = "0.1.0"
