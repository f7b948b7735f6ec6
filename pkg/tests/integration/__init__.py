"""
Integration tests package.

These tests require SQL Server (Docker) running.
"""
