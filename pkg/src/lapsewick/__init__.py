"""Lapse-rotated foliated metrics: transformations, actions, spectra."""
