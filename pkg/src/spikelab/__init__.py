"""Numerical laboratory for boundary-spike solutions of the singularly
perturbed m-Laplacian Neumann problem."""

__version__ = "0.1.0"
