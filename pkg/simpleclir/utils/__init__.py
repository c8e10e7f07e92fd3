"""Utility functions and configuration for the simpleclir package."""
