"""Data models for inputs, estimates and reports."""
