"""
Pickands Lab - a desk-scale numerical laboratory for Gaussian suprema.

This package simulates stationary Gaussian processes and fractional Brownian
motion, estimates Pickands constants by Monte Carlo and brackets supremum
exceedance probabilities with the double-sum machinery.
"""

__version__ = "0.3.0"
__author__ = "Pickands Lab contributors"
