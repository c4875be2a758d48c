"""Exponential-dispersion-family GLM engine."""
