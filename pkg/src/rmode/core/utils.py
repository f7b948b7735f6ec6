"""
Core Utilities - Shared helpers for hashing and number formatting.
"""

import hashlib
import math
from typing import Iterable, Tuple


def compute_content_hash(content: str) -> str:
    """
    Compute SHA256 hash of text content.

    Args:
        content: Text content to hash

    Returns:
        Hex-encoded SHA256 hash (64 characters)
    """
    return hashlib.sha256(content.encode("utf-8")).hexdigest()


def compute_pairs_hash(pairs: Iterable[Tuple[float, float]]) -> str:
    """
    Compute a stable SHA256 hash of numeric pairs.

    Values are serialized with ``repr`` (shortest round-trip form), so the
    hash changes only when a value changes bit-wise.
    """
    text = "\n".join(f"{format_float(a)} {format_float(b)}" for a, b in pairs)
    return compute_content_hash(text)


def format_float(value: float) -> str:
    """Format a float in its shortest round-trip representation."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    return repr(value)
