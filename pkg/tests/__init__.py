"""Tests for nmsd."""
