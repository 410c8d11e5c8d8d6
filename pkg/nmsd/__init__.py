"""nmsd: spectral-profile distances between noisy high-dimensional datasets."""

__version__ = "0.1.0"
