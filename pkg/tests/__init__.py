"""
Test package for Pickands Lab.
"""
