"""Coupled-channel scattering of a cold atom with a vibrating triplet diatom."""

__version__ = "0.1.0"
