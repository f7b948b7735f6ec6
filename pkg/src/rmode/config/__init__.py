"""
Run configuration.
"""

from .config_loader import OUTPUT_DIR_ENV, RunConfig, parse_distance

__all__ = ["OUTPUT_DIR_ENV", "RunConfig", "parse_distance"]
