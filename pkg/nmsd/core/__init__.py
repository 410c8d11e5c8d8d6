"""Numerical kernels and file parsing."""
