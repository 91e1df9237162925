"""Path decomposition, renewal and Ornstein-Zernike decay laboratory."""

__version__ = "0.1.0"
