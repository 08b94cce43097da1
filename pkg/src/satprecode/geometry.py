"""Spherical-Earth / geostationary satellite geometry.

Ground positions are (latitude, longitude) pairs in degrees. Cartesian
coordinates are ECEF-like with the x axis through (lat 0, lon 0) and the
z axis through the north pole, in meters.
"""

from __future__ import annotations

import numpy as np

from .exceptions import GeometryError


def latlon_to_ecef(lat_deg, lon_deg, radius_m: float) -> np.ndarray:
    """Convert ground coordinates on a sphere of `radius_m` to Cartesian.

    Accepts scalars or arrays; returns an array of shape (..., 3).
    """
    lat = np.radians(np.asarray(lat_deg, dtype=float))
    lon = np.radians(np.asarray(lon_deg, dtype=float))
    cos_lat = np.cos(lat)
    return radius_m * np.stack(
        (cos_lat * np.cos(lon), cos_lat * np.sin(lon), np.sin(lat)), axis=-1
    )


def geo_satellite_position(longitude_deg: float, height_m: float,
                           earth_radius_m: float) -> np.ndarray:
    """Cartesian position of a geostationary satellite at `longitude_deg`."""
    lon = np.radians(longitude_deg)
    r = earth_radius_m + height_m
    return np.array([r * np.cos(lon), r * np.sin(lon), 0.0])


def slant_range_m(sat_pos: np.ndarray, lat_deg, lon_deg,
                  earth_radius_m: float) -> np.ndarray:
    """Distance from the satellite to ground points, in meters."""
    ground = latlon_to_ecef(lat_deg, lon_deg, earth_radius_m)
    d = np.linalg.norm(ground - sat_pos, axis=-1)
    if np.any(d <= 0.0):
        raise GeometryError("nonpositive slant range")
    return d


def off_axis_angle_deg(sat_pos: np.ndarray, bore_lat, bore_lon,
                       target_lat, target_lon,
                       earth_radius_m: float) -> np.ndarray:
    """Angle at the satellite between the boresight direction and targets.

    Broadcasts over target arrays; the boresight is a single ground point.
    """
    bore = latlon_to_ecef(bore_lat, bore_lon, earth_radius_m) - sat_pos
    targ = latlon_to_ecef(target_lat, target_lon, earth_radius_m) - sat_pos
    bu = bore / np.linalg.norm(bore)
    # atan2 of the rejection/projection pair stays accurate at tiny angles,
    # where arccos of a rounded dot product does not.
    sin_part = np.linalg.norm(np.cross(targ, bu), axis=-1)
    cos_part = targ @ bu
    return np.degrees(np.arctan2(sin_part, cos_part))


def elevation_deg(sat_pos: np.ndarray, lat_deg, lon_deg,
                  earth_radius_m: float) -> np.ndarray:
    """Satellite elevation above the local horizon at ground points."""
    ground = latlon_to_ecef(lat_deg, lon_deg, earth_radius_m)
    to_sat = sat_pos - ground
    up = ground / np.linalg.norm(ground, axis=-1, keepdims=True)
    sin_el = np.sum(to_sat * up, axis=-1) / np.linalg.norm(to_sat, axis=-1)
    return np.degrees(np.arcsin(np.clip(sin_el, -1.0, 1.0)))
