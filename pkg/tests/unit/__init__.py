"""
Unit tests package.

These tests do not require external dependencies (no SQL Server, no network).
"""
