"""Transceiver, UE and scatterer geometry for a pitch-wobbling UAV.

Frame: ground is the xy-plane, the UAV platform pitches in the yz-plane and the
antenna hangs ``a_D`` below the platform centroid.  At rest the transceiver sits
at ``(0, 0, z_D)``.

All functions accept numpy arrays in place of scalars and broadcast.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

#: Scatterers closer than this to the transceiver are rejected (meters).
MIN_SEPARATION_M = 1.0


class GeometryError(ValueError):
    """Raised for degenerate or physically inconsistent geometry."""


class Point3(NamedTuple):
    """Cartesian point in meters. Fields may be arrays of matching shape."""

    x: float
    y: float
    z: float

    def asarray(self) -> np.ndarray:
        return np.stack(np.broadcast_arrays(self.x, self.y, self.z), axis=-1).astype(float)


class PathGeometry(NamedTuple):
    """Departure geometry of one propagation path, measured from the rest position."""

    aod_phi: float
    azimuth_omega: float
    path_length_at_rest: float
    scatterer_to_ue: float = 0.0


def transceiver_position(theta, a_D: float, z_D: float) -> Point3:
    """Antenna position after the platform pitches by ``theta`` radians."""
    theta = np.asarray(theta, dtype=float)
    x = np.zeros_like(theta)
    y = a_D * (1.0 - np.cos(theta))
    z = z_D + a_D * np.sin(theta)
    if theta.ndim == 0:
        return Point3(float(x), float(y), float(z))
    return Point3(x, y, z)


def _distance(p: Point3, q: Point3) -> np.ndarray:
    # hypot chain keeps full precision for the small deltas we difference later
    return np.hypot(np.hypot(np.subtract(p.x, q.x), np.subtract(p.y, q.y)), np.subtract(p.z, q.z))


def exact_path_delta(scatterer: Point3, theta_a, theta_b, a_D: float, z_D: float):
    """Exact change in transceiver-to-scatterer distance between two pitch angles.

    Returns ``|S - P_D(theta_b)| - |S - P_D(theta_a)|`` in meters.

    Raises
    ------
    GeometryError
        If the scatterer lies within :data:`MIN_SEPARATION_M` of either
        transceiver position.
    """
    pa = transceiver_position(theta_a, a_D, z_D)
    pb = transceiver_position(theta_b, a_D, z_D)
    da = _distance(scatterer, pa)
    db = _distance(scatterer, pb)
    if np.any(da < MIN_SEPARATION_M) or np.any(db < MIN_SEPARATION_M):
        raise GeometryError(
            f"scatterer within {MIN_SEPARATION_M} m of the transceiver; "
            "path-delta geometry is degenerate"
        )
    # d_b - d_a written as a ratio of squared-distance differences avoids
    # cancellation when the two distances agree to many digits
    sq_diff = (
        (np.subtract(pb.y, pa.y)) * (pb.y + pa.y - 2.0 * np.asarray(scatterer.y))
        + (np.subtract(pb.z, pa.z)) * (pb.z + pa.z - 2.0 * np.asarray(scatterer.z))
    )
    delta = sq_diff / (da + db)
    return float(delta) if np.ndim(delta) == 0 else delta


def approx_path_delta(aod_phi, theta_a, theta_b, a_D: float):
    """Small-angle path-length change ``a_D cos(phi) (theta_b - theta_a)``.

    Valid when ``a_D`` is much smaller than the path length and the pitch is
    well below one radian; the caller owns that regime.
    """
    delta = a_D * np.cos(aod_phi) * np.subtract(theta_b, theta_a)
    return float(delta) if np.ndim(delta) == 0 else delta


def aod_of(scatterer: Point3, z_D: float):
    """Departure angle from the vertical and ground-projection azimuth of a point.

    Returns
    -------
    (phi, omega)
        ``phi`` in ``[0, pi/2)`` measured from the z-axis, ``omega`` from the x-axis.
    """
    x, y, z = (np.asarray(c, dtype=float) for c in scatterer)
    height = z_D - z
    if np.any(height <= 0.0):
        raise GeometryError("point must lie strictly below the UAV height")
    horizontal = np.hypot(x, y)
    phi = np.arctan2(horizontal, height)
    omega = np.arctan2(y, x)
    if phi.ndim == 0:
        return float(phi), float(omega)
    return phi, omega


def point_from_angles(aod_phi, azimuth_omega, z_point, z_D: float) -> Point3:
    """Place a point at height ``z_point`` seen from ``(0, 0, z_D)`` at the given angles."""
    aod_phi = np.asarray(aod_phi, dtype=float)
    if np.any(aod_phi < 0.0) or np.any(aod_phi >= np.pi / 2):
        raise GeometryError("departure angle must lie in [0, pi/2)")
    height = z_D - np.asarray(z_point, dtype=float)
    if np.any(height <= 0.0):
        raise GeometryError("point must lie strictly below the UAV height")
    rho = height * np.tan(aod_phi)
    x = rho * np.cos(azimuth_omega)
    y = rho * np.sin(azimuth_omega)
    z = np.broadcast_to(np.asarray(z_point, dtype=float), np.shape(x))
    if np.ndim(x) == 0:
        return Point3(float(x), float(y), float(z))
    return Point3(x, y, np.array(z))


def path_geometry(scatterer: Point3, z_D: float, ue: Point3 | None = None) -> PathGeometry:
    """Summarize a path; ``ue=None`` marks the LoS path (scatterer is the UE)."""
    phi, omega = aod_of(scatterer, z_D)
    length = float(_distance(scatterer, Point3(0.0, 0.0, z_D)))
    to_ue = 0.0 if ue is None else float(_distance(scatterer, ue))
    return PathGeometry(phi, omega, length, to_ue)
