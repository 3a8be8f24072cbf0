"""Spectra, walk counts and SIS spreading thresholds on tori and almost-tori."""

__version__ = "0.1.0"
