"""
Spherical-earth geodesy: great-circle distances, slerp interpolation and
fixed-step path sampling.

All functions are pure; the earth is a sphere of radius ``EARTH_RADIUS_M``.
"""

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .core.exceptions import AntipodalPathError, DegeneratePathError

EARTH_RADIUS_M = 6_371_000.0

# Angular tolerance used to reject antipodal endpoints.
ANTIPODAL_TOLERANCE_RAD = 1e-9


def normalize_lon(lon_deg: float) -> float:
    """Wrap a longitude into [-180, 180)."""
    if -180.0 <= lon_deg < 180.0:
        return lon_deg
    return ((lon_deg + 180.0) % 360.0) - 180.0


@dataclass(frozen=True)
class GeoPoint:
    """
    A position on the sphere.

    Attributes:
        lat_deg: Latitude in degrees, within [-90, 90]
        lon_deg: Longitude in degrees, normalized into [-180, 180)
    """
    lat_deg: float
    lon_deg: float

    def __post_init__(self) -> None:
        lat = float(self.lat_deg)
        lon = float(self.lon_deg)
        if not math.isfinite(lat) or not -90.0 <= lat <= 90.0:
            raise ValueError(f"Latitude must be within [-90, 90], got {self.lat_deg!r}")
        if not math.isfinite(lon):
            raise ValueError(f"Longitude must be finite, got {self.lon_deg!r}")
        object.__setattr__(self, "lat_deg", lat)
        object.__setattr__(self, "lon_deg", normalize_lon(lon))

    def __str__(self) -> str:
        return f"({self.lat_deg:.6f}, {self.lon_deg:.6f})"


@dataclass(frozen=True)
class PathSample:
    """
    A sampled point along a path.

    Attributes:
        point: Sample position
        cum_dist_m: Distance from the path start in meters
    """
    point: GeoPoint
    cum_dist_m: float


def central_angle(a: GeoPoint, b: GeoPoint) -> float:
    """Angle subtended at the earth's center by a and b, in radians (haversine)."""
    lat1 = math.radians(a.lat_deg)
    lat2 = math.radians(b.lat_deg)
    dlat = lat2 - lat1
    dlon = math.radians(b.lon_deg - a.lon_deg)

    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    h = min(1.0, max(0.0, h))
    return 2.0 * math.asin(math.sqrt(h))


def great_circle_distance(a: GeoPoint, b: GeoPoint) -> float:
    """
    Haversine distance between two points, in meters.

    Symmetric and non-negative.
    """
    return EARTH_RADIUS_M * central_angle(a, b)


def initial_bearing(a: GeoPoint, b: GeoPoint) -> float:
    """Initial great-circle bearing from a to b, degrees clockwise from north in [0, 360)."""
    lat1 = math.radians(a.lat_deg)
    lat2 = math.radians(b.lat_deg)
    dlon = math.radians(b.lon_deg - a.lon_deg)

    x = math.sin(dlon) * math.cos(lat2)
    y = math.cos(lat1) * math.sin(lat2) - math.sin(lat1) * math.cos(lat2) * math.cos(dlon)
    bearing = math.degrees(math.atan2(x, y)) % 360.0
    return 0.0 if bearing >= 360.0 else bearing


def destination_point(a: GeoPoint, bearing_deg: float, distance_m: float) -> GeoPoint:
    """
    Point reached by travelling ``distance_m`` from ``a`` along the initial
    bearing ``bearing_deg``.
    """
    if distance_m < 0:
        raise ValueError(f"Distance must be >= 0, got {distance_m!r}")

    delta = distance_m / EARTH_RADIUS_M
    theta = math.radians(bearing_deg)
    lat1 = math.radians(a.lat_deg)
    lon1 = math.radians(a.lon_deg)

    sin_lat2 = math.sin(lat1) * math.cos(delta) + math.cos(lat1) * math.sin(delta) * math.cos(theta)
    sin_lat2 = min(1.0, max(-1.0, sin_lat2))
    lat2 = math.asin(sin_lat2)
    lon2 = lon1 + math.atan2(
        math.sin(theta) * math.sin(delta) * math.cos(lat1),
        math.cos(delta) - math.sin(lat1) * sin_lat2,
    )
    return GeoPoint(math.degrees(lat2), math.degrees(lon2))


def _to_cartesian(p: GeoPoint) -> np.ndarray:
    lat = math.radians(p.lat_deg)
    lon = math.radians(p.lon_deg)
    return np.array([math.cos(lat) * math.cos(lon), math.cos(lat) * math.sin(lon), math.sin(lat)])


def great_circle_points(
    a: GeoPoint,
    b: GeoPoint,
    fractions: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Spherical linear interpolation between a and b.

    Args:
        a: Start point
        b: End point
        fractions: Fractions of the arc in [0, 1]

    Returns:
        Tuple of (lats_deg, lons_deg) arrays, lons in [-180, 180)

    Raises:
        AntipodalPathError: If a and b are antipodal
    """
    fractions = np.asarray(fractions, dtype=float)
    delta = central_angle(a, b)
    if abs(math.pi - delta) < ANTIPODAL_TOLERANCE_RAD:
        raise AntipodalPathError(f"Endpoints {a} and {b} are antipodal; great circle is undefined")

    if delta == 0.0:
        return (
            np.full(fractions.shape, a.lat_deg),
            np.full(fractions.shape, a.lon_deg),
        )

    pa = _to_cartesian(a)
    pb = _to_cartesian(b)
    sin_delta = math.sin(delta)
    wa = np.sin((1.0 - fractions) * delta) / sin_delta
    wb = np.sin(fractions * delta) / sin_delta
    xyz = wa[..., np.newaxis] * pa + wb[..., np.newaxis] * pb

    x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]
    lats = np.degrees(np.arctan2(z, np.hypot(x, y)))
    lons = np.degrees(np.arctan2(y, x))
    lons = np.where(lons >= 180.0, lons - 360.0, lons)
    return lats, lons


def intermediate_point(a: GeoPoint, b: GeoPoint, f: float) -> GeoPoint:
    """
    Point at fraction ``f`` of the great-circle arc from a to b.

    ``f=0`` returns a and ``f=1`` returns b exactly.

    Raises:
        ValueError: If f is outside [0, 1]
        AntipodalPathError: If a and b are antipodal
    """
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"Fraction must be within [0, 1], got {f!r}")

    if abs(math.pi - central_angle(a, b)) < ANTIPODAL_TOLERANCE_RAD:
        raise AntipodalPathError(f"Endpoints {a} and {b} are antipodal; great circle is undefined")
    if f == 0.0:
        return a
    if f == 1.0:
        return b

    lats, lons = great_circle_points(a, b, np.array([f]))
    return GeoPoint(float(lats[0]), float(lons[0]))


def path_step_count(distance_m: float, max_step_m: float) -> int:
    """
    Number of uniform intervals needed so that no interval exceeds ``max_step_m``.

    A relative slack of 1e-12 keeps exact divisions (1000 m / 250 m) from
    gaining an extra interval through rounding.
    """
    if not max_step_m > 0:
        raise ValueError(f"max_step_m must be > 0, got {max_step_m!r}")
    return max(1, math.ceil((distance_m / max_step_m) * (1.0 - 1e-12)))


def sample_path(a: GeoPoint, b: GeoPoint, max_step_m: float) -> List[PathSample]:
    """
    Sample the great circle from a to b at uniform steps no longer than ``max_step_m``.

    Returns N+1 samples with N = ceil(distance / max_step_m); the first sample
    is a and the last is b.

    Raises:
        ValueError: If max_step_m is not positive
        DegeneratePathError: If a and b coincide
        AntipodalPathError: If a and b are antipodal
    """
    if not max_step_m > 0:
        raise ValueError(f"max_step_m must be > 0, got {max_step_m!r}")

    distance = great_circle_distance(a, b)
    if distance == 0.0:
        raise DegeneratePathError(f"Path start and end coincide at {a}")

    n = path_step_count(distance, max_step_m)
    fractions = np.arange(n + 1, dtype=float) / n
    lats, lons = great_circle_points(a, b, fractions)

    samples = [PathSample(point=a, cum_dist_m=0.0)]
    for i in range(1, n):
        samples.append(
            PathSample(
                point=GeoPoint(float(lats[i]), float(lons[i])),
                cum_dist_m=distance * i / n,
            )
        )
    samples.append(PathSample(point=b, cum_dist_m=distance))
    return samples
