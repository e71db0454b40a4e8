"""Weak-measurement estimation of single-mode Gaussian states."""
