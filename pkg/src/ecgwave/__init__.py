"""Wavelet sub-band features and classifiers for single-beat ECG classification."""

__version__ = "0.1.0"
