"""
Tests package for Holocron Analytics.
"""
