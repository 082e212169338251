"""Head-pose based visual attention toward the robot's camera.

Geometry uses a camera frame with x toward image-right, y up and z along
the optical axis into the scene. A direction with horizontal angle ``a``
and vertical angle ``b`` (degrees) is ``(cos b sin a, sin b, cos b cos a)``.
A head with yaw = pitch = 0 looks straight back into the camera, i.e. along
``-z``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .core import EngineConfig, FaceObservation, ValidationError


class Bearing(NamedTuple):
    """Angular position of a face relative to the optical axis (degrees)."""

    alpha: float  # horizontal, positive toward image-right
    beta: float  # vertical, positive up


class AttentionEstimate(NamedTuple):
    deviation: float  # degrees between head facing and face->camera direction
    score: float
    attentive: bool


def bearing_from_bbox(bbox, hfov: float, vfov: float) -> Bearing:
    """Pinhole back-projection of the box center to horizontal/vertical angles."""
    if not (0 < hfov < 180) or not (0 < vfov < 180):
        raise ValidationError("fov", "field of view must lie in (0, 180) degrees")
    cx, cy = bbox[0], bbox[1]
    alpha = math.atan((cx - 0.5) * 2.0 * math.tan(math.radians(hfov) / 2.0))
    beta = math.atan((0.5 - cy) * 2.0 * math.tan(math.radians(vfov) / 2.0))
    return Bearing(math.degrees(alpha), math.degrees(beta))


def bbox_center_from_bearing(bearing: Bearing, hfov: float, vfov: float) -> tuple[float, float]:
    """Inverse of :func:`bearing_from_bbox` (image-plane center of a face)."""
    cx = 0.5 + math.tan(math.radians(bearing.alpha)) / (2.0 * math.tan(math.radians(hfov) / 2.0))
    cy = 0.5 - math.tan(math.radians(bearing.beta)) / (2.0 * math.tan(math.radians(vfov) / 2.0))
    return cx, cy


def direction(h_deg: float, v_deg: float) -> tuple[float, float, float]:
    h, v = math.radians(h_deg), math.radians(v_deg)
    cv = math.cos(v)
    return (cv * math.sin(h), math.sin(v), cv * math.cos(h))


def facing_direction(yaw: float, pitch: float) -> tuple[float, float, float]:
    """Unit vector the face points along; roll does not change it."""
    y, p = math.radians(yaw), math.radians(pitch)
    cp = math.cos(p)
    return (cp * math.sin(y), math.sin(p), -cp * math.cos(y))


def angle_between(u, v) -> float:
    """Angle in degrees between two unit vectors, accurate near 0 and 180."""
    cx = u[1] * v[2] - u[2] * v[1]
    cy = u[2] * v[0] - u[0] * v[2]
    cz = u[0] * v[1] - u[1] * v[0]
    dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
    return math.degrees(math.atan2(math.sqrt(cx * cx + cy * cy + cz * cz), dot))


def head_deviation(yaw: float, pitch: float, bearing: Bearing) -> float:
    """Degrees between where the head points and the direction to the camera.

    The face->camera direction is taken as the reverse of the bearing ray,
    so no depth is needed.
    """
    fx, fy, fz = facing_direction(yaw, pitch)
    px, py, pz = direction(bearing.alpha, bearing.beta)
    return angle_between((fx, fy, fz), (-px, -py, -pz))


def attention_score(yaw: float, pitch: float, bearing: Bearing, cfg: EngineConfig) -> AttentionEstimate:
    dev = head_deviation(yaw, pitch, bearing)
    theta = cfg.attention_half_angle
    score = min(1.0, max(0.0, 1.0 - dev / (2.0 * theta)))
    return AttentionEstimate(dev, score, dev <= theta)


def estimate_attention(obs: FaceObservation, cfg: EngineConfig, bearing: Bearing | None = None) -> AttentionEstimate:
    """Attention for a full observation. Roll is deliberately not consulted.

    Pass ``bearing`` when it is already known to skip recomputing it.
    """
    if bearing is None:
        bearing = bearing_from_bbox(obs.bbox, cfg.hfov, cfg.vfov)
    return attention_score(obs.yaw, obs.pitch, bearing, cfg)
