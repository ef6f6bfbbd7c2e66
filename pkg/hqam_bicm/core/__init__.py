# hqam_bicm/core/__init__.py
"""Numerical core: constellations, codes, multiplexers, spectra, bounds, simulation, search."""
